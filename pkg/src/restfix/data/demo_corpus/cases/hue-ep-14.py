import os

import requests

BRIDGE = "https://api.meethue.com/route"
HEADERS = {"hue-application-key": os.environ["HUE_APP_KEY"]}


def recall_scene(scene_id):
    url = f"{BRIDGE}/clip/v2/scene/{scene_id}"
    return requests.put(url, headers=HEADERS, json={"recall": {"action": "active"}})
