import json
import os

import requests

API_URL = "https://api.switch-bot.com/v1.1"
OPEN_TOKEN = os.getenv("OPEN_TOKEN")


def get_device_list() -> json:
    url = f"{API_URL}/devices"
    response = requests.get(url, headers=HEADERS)
    return response.json()


HEADERS = {
    "Authorization": OPEN_TOKEN,
    "Content-Type": "application/json; charset=utf-8",
}
