import os

import requests

API = "https://api.meethue.com/route/clip/v2"
KEY = os.environ["HUE_APP_KEY"]


def turn_on(light_id):
    headers = dict(Accept="application/json")
    headers["hue-application-key"] = KEY
    body = {"type": "light", "on": {"on": True}}
    return requests.post(API + "/resource/light/" + light_id, headers=headers, json=body)
