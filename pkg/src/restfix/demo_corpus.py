"""Synthesized demo corpus shaped like the evaluation datasets.

21 Hue-shaped cases (14 endpoint, 7 request body) and 10 SwitchBot-shaped
cases (5 endpoint, 4 request header, 1 request body). Two of the header
cases build their header map through helper calls, so absence of the
required attributes cannot be proven statically.

Run ``python -m restfix.demo_corpus <dir>`` to (re)write the corpus.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from textwrap import dedent

import yaml

HUE = "Philips Hue API"
SWITCHBOT = "SwitchBot API"

HUE_SPEC = """\
restfix_spec: 1
api_name: Philips Hue API
domain: api.meethue.com
base_path: /route
endpoints:
  - {method: GET, path: /clip/v2/resource/light, required_headers: [hue-application-key]}
  - {method: GET, path: "/clip/v2/resource/light/{id}", required_headers: [hue-application-key]}
  - method: PUT
    path: "/clip/v2/resource/light/{id}"
    required_headers: [hue-application-key]
    required_body: [{name: type, value: light}, {name: on}]
  - {method: GET, path: /clip/v2/resource/grouped_light, required_headers: [hue-application-key]}
  - method: PUT
    path: "/clip/v2/resource/grouped_light/{id}"
    required_headers: [hue-application-key]
    required_body: [{name: type, value: grouped_light}, {name: on}]
  - {method: GET, path: /clip/v2/resource/room, required_headers: [hue-application-key]}
  - {method: GET, path: /clip/v2/resource/scene, required_headers: [hue-application-key]}
  - method: POST
    path: /clip/v2/resource/scene
    required_headers: [hue-application-key]
    required_body: [{name: type, value: scene}, {name: metadata}, {name: group}, {name: actions}]
  - method: PUT
    path: "/clip/v2/resource/scene/{id}"
    required_headers: [hue-application-key]
    required_body: [{name: recall}]
  - {method: GET, path: /clip/v2/resource/device, required_headers: [hue-application-key]}
  - {method: GET, path: /clip/v2/resource/bridge, required_headers: [hue-application-key]}
"""

SWITCHBOT_SPEC = """\
restfix_spec: 1
api_name: SwitchBot API
domain: api.switch-bot.com
endpoints:
  - {method: GET, path: /v1.1/devices, required_headers: [Authorization, sign, t, nonce]}
  - {method: GET, path: "/v1.1/devices/{deviceId}/status", required_headers: [Authorization, sign, t, nonce]}
  - method: POST
    path: "/v1.1/devices/{deviceId}/commands"
    required_headers: [Authorization, sign, t, nonce]
    required_body: [{name: command}, {name: commandType, value: command}]
  - {method: GET, path: /v1.1/scenes, required_headers: [Authorization, sign, t, nonce]}
  - {method: POST, path: "/v1.1/scenes/{sceneId}/execute", required_headers: [Authorization, sign, t, nonce]}
"""

SPEC_FILES = {HUE: "specs/hue.yaml", SWITCHBOT: "specs/switchbot.yaml"}


@dataclass(frozen=True)
class DemoCase:
    case_id: str
    api: str
    expected: tuple[str, ...]
    source: str
    fix: str
    resolvable: bool = True


def _unescape(value: str) -> str:
    return value.replace("{{", "{").replace("}}", "}")


def _pair(template: str, bad: dict, good: dict) -> tuple[str, str]:
    """Render a misuse and its fix from one template.

    Substituted values are written with the template's doubled braces.
    """
    template = dedent(template).lstrip("\n")
    bad = {k: _unescape(v) for k, v in bad.items()}
    good = {k: _unescape(v) for k, v in good.items()}
    return template.format(**bad), template.format(**good)


_HUE_HEAD = '''\
import os

import requests

BRIDGE = "https://api.meethue.com/route"
APP_KEY = os.environ["HUE_APP_KEY"]
HEADERS = {{"hue-application-key": APP_KEY}}
'''


def _hue_get(path_bad: str, path_good: str, func: str) -> tuple[str, str]:
    tpl = _HUE_HEAD + '''

def {func}():
    url = f"{{BRIDGE}}{path}"
    response = requests.get(url, headers=HEADERS)
    response.raise_for_status()
    return response.json()["data"]
'''
    return _pair(tpl, {"func": func, "path": path_bad}, {"func": func, "path": path_good})


def _hue_cases() -> list[DemoCase]:
    cases: list[tuple[str, tuple[str, str]]] = []
    # endpoint misuses -----------------------------------------------------
    cases.append(("Endpoint", _hue_get("/clip/v1/resource/light", "/clip/v2/resource/light", "list_lights")))
    cases.append(("Endpoint", _hue_get("/clip/v2/resource/lights", "/clip/v2/resource/light", "list_lights")))
    cases.append(("Endpoint", _hue_get("/clip/v2/resources/room", "/clip/v2/resource/room", "list_rooms")))
    cases.append(("Endpoint", _hue_get("/clip/v2/resource/scenes", "/clip/v2/resource/scene", "list_scenes")))
    cases.append(("Endpoint", _hue_get("/clip/v2/resource/devices", "/clip/v2/resource/device", "list_devices")))
    cases.append(("Endpoint", _hue_get("/clip/v2/resource/brige", "/clip/v2/resource/bridge", "bridge_info")))
    cases.append(("Endpoint", _hue_get("/clip/v2/resource/zone", "/clip/v2/resource/room", "list_zones")))
    cases.append(("Endpoint", _hue_get("/v2/resource/grouped_light", "/clip/v2/resource/grouped_light", "list_groups")))
    cases.append((
        "Endpoint",
        _pair(
            '''
            import os

            import requests

            BASE_URL = "https://api.meethue.com/route/"
            USERNAME = os.environ["HUE_USERNAME"]
            HEADERS = {{"hue-application-key": USERNAME}}
            LIGHTS_URL = BASE_URL + {path}


            def get_lights():
                return requests.get(LIGHTS_URL, headers=HEADERS).json()
            ''',
            {"path": '"api/" + USERNAME + "/lights"'},
            {"path": '"clip/v2/resource/light"'},
        ),
    ))
    cases.append((
        "Endpoint",
        _pair(
            '''
            import os

            import requests

            HUE_HOST = "https://api.meethue.com"
            HEADERS = {{"hue-application-key": os.getenv("HUE_KEY")}}


            def light_state(light_id):
                url = f"{{HUE_HOST}}{base}/clip/v2/resource/light/{{light_id}}"
                return requests.get(url, headers=HEADERS).json()
            ''',
            {"base": ""},
            {"base": "/route"},
        ),
    ))
    cases.append((
        "Endpoint",
        _pair(
            '''
            import os

            import requests

            API = "https://api.meethue.com/route/clip/v2"
            KEY = os.environ["HUE_APP_KEY"]


            def turn_on(light_id):
                headers = dict(Accept="application/json")
                headers["hue-application-key"] = KEY
                body = {{"type": "light", "on": {{"on": True}}}}
                return requests.{method}(API + "/resource/light/" + light_id, headers=headers, json=body)
            ''',
            {"method": "post"},
            {"method": "put"},
        ),
    ))
    cases.append((
        "Endpoint",
        _pair(
            '''
            import os

            import requests

            API = "https://api.meethue.com/route/clip/v2"
            HEADERS = {{"hue-application-key": os.environ["HUE_APP_KEY"]}}


            def set_brightness(light_id, level):
                url = f"{{API}}/resource/light/{{light_id}}{suffix}"
                payload = {{"type": "light", "on": {{"on": True}}, "dimming": {{"brightness": level}}}}
                return requests.put(url, headers=HEADERS, json=payload)
            ''',
            {"suffix": "/state"},
            {"suffix": ""},
        ),
    ))
    cases.append((
        "Endpoint",
        _pair(
            '''
            import os

            import requests

            ROOT = "https://api.meethue.com/route"
            HEADERS = {{"hue-application-key": os.environ["HUE_APP_KEY"]}}
            GROUP_PATH = "{path}"


            def set_group(group_id, on):
                payload = {{"type": "grouped_light", "on": {{"on": on}}}}
                resp = requests.put(ROOT + GROUP_PATH + group_id, headers=HEADERS, json=payload)
                return resp.status_code
            ''',
            {"path": "/clip/v2/resource/group/"},
            {"path": "/clip/v2/resource/grouped_light/"},
        ),
    ))
    cases.append((
        "Endpoint",
        _pair(
            '''
            import os

            import requests

            BRIDGE = "https://api.meethue.com/route"
            HEADERS = {{"hue-application-key": os.environ["HUE_APP_KEY"]}}


            def recall_scene(scene_id):
                url = f"{{BRIDGE}}{path}{{scene_id}}"
                return requests.put(url, headers=HEADERS, json={{"recall": {{"action": "active"}}}})
            ''',
            {"path": "/clip/v2/scene/"},
            {"path": "/clip/v2/resource/scene/"},
        ),
    ))
    # request body misuses -------------------------------------------------
    body_tpl = _HUE_HEAD + '''

def set_light(light_id, on):
    url = f"{{BRIDGE}}/clip/v2/resource/light/{{light_id}}"
    payload = {payload}
    return requests.put(url, headers=HEADERS, json=payload)
'''
    cases.append(("RequestBody", _pair(body_tpl, {"payload": '{{"on": {{"on": on}}}}'}, {"payload": '{{"type": "light", "on": {{"on": on}}}}'})))
    cases.append(("RequestBody", _pair(body_tpl, {"payload": '{{"type": "lights", "on": {{"on": on}}}}'}, {"payload": '{{"type": "light", "on": {{"on": on}}}}'})))
    cases.append((
        "RequestBody",
        _pair(
            _HUE_HEAD + '''

def set_group(group_id, on):
    url = BRIDGE + "/clip/v2/resource/grouped_light/" + group_id
    body = {{"type": "grouped_light"}}
    {extra}
    return requests.put(url, headers=HEADERS, json=body)
''',
            {"extra": 'body["dimming"] = {{"brightness": 100 if on else 0}}'},
            {"extra": 'body["on"] = {{"on": on}}'},
        ),
    ))
    scene_tpl = _HUE_HEAD + '''
SCENE_TYPE = "{stype}"


def create_scene(name, group_id, actions):
    body = {{
        "type": SCENE_TYPE,
{meta}        "group": {{"rid": group_id, "rtype": "room"}},
        "actions": actions,
    }}
    return requests.post(BRIDGE + "/clip/v2/resource/scene", headers=HEADERS, json=body)
'''
    cases.append((
        "RequestBody",
        _pair(scene_tpl, {"stype": "scene", "meta": ""}, {"stype": "scene", "meta": '        "metadata": {{"name": name}},\n'}),
    ))
    cases.append((
        "RequestBody",
        _pair(
            scene_tpl,
            {"stype": "room", "meta": '        "metadata": {{"name": name}},\n'},
            {"stype": "scene", "meta": '        "metadata": {{"name": name}},\n'},
        ),
    ))
    cases.append((
        "RequestBody",
        _pair(
            _HUE_HEAD + '''

def activate(scene_id):
    url = f"{{BRIDGE}}/clip/v2/resource/scene/{{scene_id}}"
    return requests.put(url, headers=HEADERS, json={payload})
''',
            {"payload": '{{"scene": scene_id, "status": "active"}}'},
            {"payload": '{{"recall": {{"action": "active"}}}}'},
        ),
    ))
    cases.append((
        "RequestBody",
        _pair(
            '''
            import json
            import os

            import requests

            BRIDGE = "https://api.meethue.com/route"
            HEADERS = {{"hue-application-key": os.environ["HUE_APP_KEY"], "Content-Type": "application/json"}}


            def dim(light_id, level):
                url = BRIDGE + f"/clip/v2/resource/light/{{light_id}}"
                state = dict(type="light", dimming={{"brightness": level}}{extra})
                return requests.put(url, headers=HEADERS, data=json.dumps(state))
            ''',
            {"extra": ""},
            {"extra": ', on={{"on": True}}'},
        ),
    ))
    out = []
    counters = {"Endpoint": 0, "RequestBody": 0}
    for category, (bad, good) in cases:
        counters[category] += 1
        tag = "ep" if category == "Endpoint" else "body"
        out.append(DemoCase(f"hue-{tag}-{counters[category]:02d}", HUE, (category,), bad, good))
    return out


_SB_AUTH = '''\
import base64
import hashlib
import hmac
import os
import time
import uuid

import requests

TOKEN = os.environ["SWITCHBOT_TOKEN"]
SECRET = os.environ["SWITCHBOT_SECRET"]
API_HOST = "https://api.switch-bot.com"
'''

_SB_SIGNED = '''
nonce = str(uuid.uuid4())
t = str(int(round(time.time() * 1000)))
string_to_sign = bytes(f"{{TOKEN}}{{t}}{{nonce}}", "utf-8")
sign = base64.b64encode(hmac.new(bytes(SECRET, "utf-8"), msg=string_to_sign, digestmod=hashlib.sha256).digest())
HEADERS = {{
    "Authorization": TOKEN,
    "Content-Type": "application/json; charset=utf8",
    "t": t,
    "sign": str(sign, "utf-8"),
    "nonce": nonce,
}}
'''


def _switchbot_cases() -> list[DemoCase]:
    cases: list[tuple[str, tuple[str, str], bool]] = []
    ep_tpl = _SB_AUTH + _SB_SIGNED + '''

def {func}({args}):
    url = f"{{API_HOST}}{path}"
    return requests.{method}(url, headers=HEADERS{extra}).json()
'''
    for func, args, bad, good, method, extra in (
        ("get_devices", "", "/v1.0/devices", "/v1.1/devices", "get", ""),
        ("get_status", "device_id", "/v1.0/devices/{{device_id}}/status", "/v1.1/devices/{{device_id}}/status", "get", ""),
        ("send_command", "device_id", "/v1.0/devices/{{device_id}}/commands", "/v1.1/devices/{{device_id}}/commands", "post",
         ', json={{"command": "turnOn", "parameter": "default", "commandType": "command"}}'),
        ("get_scenes", "", "/v1.0/scenes", "/v1.1/scenes", "get", ""),
        ("run_scene", "scene_id", "/v1.1/scene/{{scene_id}}/execute", "/v1.1/scenes/{{scene_id}}/execute", "post", ""),
    ):
        common = {"func": func, "args": args, "method": method, "extra": extra}
        cases.append(("Endpoint", _pair(ep_tpl, {**common, "path": bad}, {**common, "path": good}), True))

    cases.append((
        "RequestHeaders",
        _pair(
            '''
            import json
            import os

            import requests

            API_URL = "https://api.switch-bot.com/v1.1"
            OPEN_TOKEN = os.getenv("OPEN_TOKEN")


            def get_device_list() -> json:
                url = f"{{API_URL}}/devices"
                response = requests.get(url, headers=HEADERS)
                return response.json()


            HEADERS = {{
                "Authorization": OPEN_TOKEN,
                "Content-Type": "application/json; charset=utf-8",{extra}
            }}
            ''',
            {"extra": ""},
            {"extra": '\n    "sign": os.getenv("SIGN"),\n    "t": os.getenv("T"),\n    "nonce": os.getenv("NONCE"),'},
        ),
        True,
    ))
    cases.append((
        "RequestHeaders",
        _pair(
            _SB_AUTH + '''

def device_status(device_id):
    t = str(int(time.time() * 1000))
    headers = {{"Authorization": TOKEN, "t": t}}
    headers["sign"] = sign_request(t)
{extra}    url = API_HOST + "/v1.1/devices/" + device_id + "/status"
    return requests.get(url, headers=headers).json()


def sign_request(t):
    return hmac.new(SECRET.encode(), (TOKEN + t).encode(), hashlib.sha256).hexdigest()
''',
            {"extra": ""},
            {"extra": '    headers["nonce"] = ""\n'},
        ),
        True,
    ))
    cases.append((
        "RequestHeaders",
        _pair(
            _SB_AUTH + '''

def auth_headers():
    return {{"Authorization": TOKEN}}


def list_scenes():
    headers = {{**auth_headers(), "Content-Type": "application/json"{extra}}}
    return requests.get(f"{{API_HOST}}/v1.1/scenes", headers=headers).json()
''',
            {"extra": ""},
            {"extra": ', "Authorization": TOKEN, "sign": "", "t": "", "nonce": ""'},
        ),
        False,
    ))
    cases.append((
        "RequestHeaders",
        _pair(
            _SB_AUTH + '''

def base_headers(token):
    return {{"Authorization": token, "Content-Type": "application/json"}}


def run_scene(scene_id):
    headers = dict(base_headers(TOKEN){extra})
    url = f"{{API_HOST}}/v1.1/scenes/{{scene_id}}/execute"
    return requests.post(url, headers=headers).json()
''',
            {"extra": ""},
            {"extra": ', Authorization=TOKEN, sign="", t="", nonce=""'},
        ),
        False,
    ))
    cases.append((
        "RequestBody",
        _pair(
            _SB_AUTH + _SB_SIGNED + '''
COMMAND_TYPE = "{ctype}"


def press(device_id):
    body = {{"command": "press", "parameter": "default", "commandType": COMMAND_TYPE}}
    url = f"{{API_HOST}}/v1.1/devices/{{device_id}}/commands"
    return requests.post(url, headers=HEADERS, json=body).json()
''',
            {"ctype": "customize"},
            {"ctype": "command"},
        ),
        True,
    ))
    out = []
    counters = {"Endpoint": 0, "RequestHeaders": 0, "RequestBody": 0}
    tags = {"Endpoint": "ep", "RequestHeaders": "hdr", "RequestBody": "body"}
    for category, (bad, good), resolvable in cases:
        counters[category] += 1
        out.append(
            DemoCase(f"sb-{tags[category]}-{counters[category]:02d}", SWITCHBOT, (category,), bad, good, resolvable)
        )
    return out


def demo_cases() -> list[DemoCase]:
    return sorted(_hue_cases() + _switchbot_cases(), key=lambda c: c.case_id)


def _fenced(code: str) -> str:
    return f"```python\n{code}```\n"


def write_demo_corpus(root, baseline_attempts: int = 5) -> Path:
    """Write specs, cases, reference fixes, mock fixtures and the manifest.

    Mock fixtures answer dcfix prompts with the reference fix and baseline
    prompts with the unchanged source.
    """
    root = Path(root)
    for sub in ("specs", "cases", "fixes", "fixtures/dcfix", "fixtures/baseline"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    (root / SPEC_FILES[HUE]).write_text(HUE_SPEC, encoding="utf-8")
    (root / SPEC_FILES[SWITCHBOT]).write_text(SWITCHBOT_SPEC, encoding="utf-8")
    manifest = []
    for case in demo_cases():
        (root / "cases" / f"{case.case_id}.py").write_text(case.source, encoding="utf-8")
        (root / "fixes" / f"{case.case_id}.py").write_text(case.fix, encoding="utf-8")
        (root / "fixtures/dcfix" / f"{case.case_id}.attempt1.txt").write_text(_fenced(case.fix), encoding="utf-8")
        for k in range(1, baseline_attempts + 1):
            (root / "fixtures/baseline" / f"{case.case_id}.attempt{k}.txt").write_text(
                _fenced(case.source), encoding="utf-8"
            )
        manifest.append(
            {
                "id": case.case_id,
                "api": case.api,
                "source": f"cases/{case.case_id}.py",
                "spec": SPEC_FILES[case.api],
                "expected": list(case.expected),
                "reference_fix": f"fixes/{case.case_id}.py",
            }
        )
    (root / "manifest.yaml").write_text(yaml.safe_dump(manifest, sort_keys=False), encoding="utf-8")
    (root / "mock_backend.yaml").write_text("fixtures: fixtures\n", encoding="utf-8")
    return root / "manifest.yaml"


def bundled_manifest() -> Path:
    return Path(__file__).parent / "data" / "demo_corpus" / "manifest.yaml"


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else str(bundled_manifest().parent)
    print(write_demo_corpus(target))
