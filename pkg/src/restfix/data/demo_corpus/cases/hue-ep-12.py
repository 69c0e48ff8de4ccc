import os

import requests

API = "https://api.meethue.com/route/clip/v2"
HEADERS = {"hue-application-key": os.environ["HUE_APP_KEY"]}


def set_brightness(light_id, level):
    url = f"{API}/resource/light/{light_id}/state"
    payload = {"type": "light", "on": {"on": True}, "dimming": {"brightness": level}}
    return requests.put(url, headers=HEADERS, json=payload)
