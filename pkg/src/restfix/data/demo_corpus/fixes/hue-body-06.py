import os

import requests

BRIDGE = "https://api.meethue.com/route"
APP_KEY = os.environ["HUE_APP_KEY"]
HEADERS = {"hue-application-key": APP_KEY}


def activate(scene_id):
    url = f"{BRIDGE}/clip/v2/resource/scene/{scene_id}"
    return requests.put(url, headers=HEADERS, json={"recall": {"action": "active"}})
