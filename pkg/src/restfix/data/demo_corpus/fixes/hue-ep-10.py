import os

import requests

HUE_HOST = "https://api.meethue.com"
HEADERS = {"hue-application-key": os.getenv("HUE_KEY")}


def light_state(light_id):
    url = f"{HUE_HOST}/route/clip/v2/resource/light/{light_id}"
    return requests.get(url, headers=HEADERS).json()
