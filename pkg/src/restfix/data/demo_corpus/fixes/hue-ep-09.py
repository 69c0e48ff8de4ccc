import os

import requests

BASE_URL = "https://api.meethue.com/route/"
USERNAME = os.environ["HUE_USERNAME"]
HEADERS = {"hue-application-key": USERNAME}
LIGHTS_URL = BASE_URL + "clip/v2/resource/light"


def get_lights():
    return requests.get(LIGHTS_URL, headers=HEADERS).json()
