import os

import requests

BRIDGE = "https://api.meethue.com/route"
APP_KEY = os.environ["HUE_APP_KEY"]
HEADERS = {"hue-application-key": APP_KEY}


def set_light(light_id, on):
    url = f"{BRIDGE}/clip/v2/resource/light/{light_id}"
    payload = {"type": "light", "on": {"on": on}}
    return requests.put(url, headers=HEADERS, json=payload)
