import json
import os

import requests

BRIDGE = "https://api.meethue.com/route"
HEADERS = {"hue-application-key": os.environ["HUE_APP_KEY"], "Content-Type": "application/json"}


def dim(light_id, level):
    url = BRIDGE + f"/clip/v2/resource/light/{light_id}"
    state = dict(type="light", dimming={"brightness": level}, on={"on": True})
    return requests.put(url, headers=HEADERS, data=json.dumps(state))
