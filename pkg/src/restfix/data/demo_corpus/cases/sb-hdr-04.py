import base64
import hashlib
import hmac
import os
import time
import uuid

import requests

TOKEN = os.environ["SWITCHBOT_TOKEN"]
SECRET = os.environ["SWITCHBOT_SECRET"]
API_HOST = "https://api.switch-bot.com"


def base_headers(token):
    return {"Authorization": token, "Content-Type": "application/json"}


def run_scene(scene_id):
    headers = dict(base_headers(TOKEN))
    url = f"{API_HOST}/v1.1/scenes/{scene_id}/execute"
    return requests.post(url, headers=headers).json()
