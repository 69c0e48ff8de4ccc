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

nonce = str(uuid.uuid4())
t = str(int(round(time.time() * 1000)))
string_to_sign = bytes(f"{TOKEN}{t}{nonce}", "utf-8")
sign = base64.b64encode(hmac.new(bytes(SECRET, "utf-8"), msg=string_to_sign, digestmod=hashlib.sha256).digest())
HEADERS = {
    "Authorization": TOKEN,
    "Content-Type": "application/json; charset=utf8",
    "t": t,
    "sign": str(sign, "utf-8"),
    "nonce": nonce,
}


def get_devices():
    url = f"{API_HOST}/v1.0/devices"
    return requests.get(url, headers=HEADERS).json()
