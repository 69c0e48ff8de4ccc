import os

import requests

BRIDGE = "https://api.meethue.com/route"
APP_KEY = os.environ["HUE_APP_KEY"]
HEADERS = {"hue-application-key": APP_KEY}


def set_group(group_id, on):
    url = BRIDGE + "/clip/v2/resource/grouped_light/" + group_id
    body = {"type": "grouped_light"}
    body["dimming"] = {"brightness": 100 if on else 0}
    return requests.put(url, headers=HEADERS, json=body)
