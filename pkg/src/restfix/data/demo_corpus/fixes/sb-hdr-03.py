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


def auth_headers():
    return {"Authorization": TOKEN}


def list_scenes():
    headers = {**auth_headers(), "Content-Type": "application/json", "Authorization": TOKEN, "sign": "", "t": "", "nonce": ""}
    return requests.get(f"{API_HOST}/v1.1/scenes", headers=headers).json()
