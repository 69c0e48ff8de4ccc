import os

import requests

BRIDGE = "https://api.meethue.com/route"
APP_KEY = os.environ["HUE_APP_KEY"]
HEADERS = {"hue-application-key": APP_KEY}


def list_scenes():
    url = f"{BRIDGE}/clip/v2/resource/scene"
    response = requests.get(url, headers=HEADERS)
    response.raise_for_status()
    return response.json()["data"]
