import os

import requests

BRIDGE = "https://api.meethue.com/route"
APP_KEY = os.environ["HUE_APP_KEY"]
HEADERS = {"hue-application-key": APP_KEY}

SCENE_TYPE = "room"


def create_scene(name, group_id, actions):
    body = {
        "type": SCENE_TYPE,
        "metadata": {"name": name},
        "group": {"rid": group_id, "rtype": "room"},
        "actions": actions,
    }
    return requests.post(BRIDGE + "/clip/v2/resource/scene", headers=HEADERS, json=body)
