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


def device_status(device_id):
    t = str(int(time.time() * 1000))
    headers = {"Authorization": TOKEN, "t": t}
    headers["sign"] = sign_request(t)
    url = API_HOST + "/v1.1/devices/" + device_id + "/status"
    return requests.get(url, headers=headers).json()


def sign_request(t):
    return hmac.new(SECRET.encode(), (TOKEN + t).encode(), hashlib.sha256).hexdigest()
