import os

import requests

ROOT = "https://api.meethue.com/route"
HEADERS = {"hue-application-key": os.environ["HUE_APP_KEY"]}
GROUP_PATH = "/clip/v2/resource/group/"


def set_group(group_id, on):
    payload = {"type": "grouped_light", "on": {"on": on}}
    resp = requests.put(ROOT + GROUP_PATH + group_id, headers=HEADERS, json=payload)
    return resp.status_code
