"""LLM backends used by the repair loop.

Every backend answers ``complete(prompt)`` with raw response text and
raises :class:`BackendError` on failure. ``case_id``, ``attempt`` and
``mode`` are passed along so that deterministic test doubles can key
their answers; network backends ignore them.
"""

from __future__ import annotations

import json
import os
import socket
import urllib.error
import urllib.request
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Callable

import yaml

from .errors import BackendError

DEFAULT_TIMEOUT = 120.0


class LlmBackend(ABC):
    name = "abstract"

    @abstractmethod
    def complete(self, prompt: str, *, case_id: str = "", attempt: int = 1, mode: str = "dcfix") -> str:
        ...


class HttpChatBackend(LlmBackend):
    """Chat-completion style JSON endpoint.

    The credential is read from the environment variable named by
    ``api_key_env`` at call time and sent as a bearer token.
    """

    name = "http"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        temperature: float | None = None,
        system_prompt: str | None = None,
    ):
        self.base_url = base_url
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.temperature = temperature
        self.system_prompt = system_prompt

    def payload(self, prompt: str) -> dict[str, Any]:
        messages = []
        if self.system_prompt:
            messages.append({"role": "system", "content": self.system_prompt})
        messages.append({"role": "user", "content": prompt})
        body: dict[str, Any] = {"model": self.model, "messages": messages}
        if self.temperature is not None:
            body["temperature"] = self.temperature
        return body

    def complete(self, prompt: str, *, case_id: str = "", attempt: int = 1, mode: str = "dcfix") -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env)
            if not key:
                raise BackendError(f"environment variable {self.api_key_env} is not set")
            headers["Authorization"] = f"Bearer {key}"
        req = urllib.request.Request(
            self.base_url, data=json.dumps(self.payload(prompt)).encode("utf-8"), headers=headers, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                data = json.loads(resp.read().decode("utf-8"))
        except (socket.timeout, TimeoutError) as exc:
            raise BackendError(f"request timed out after {self.timeout}s") from exc
        except urllib.error.HTTPError as exc:
            raise BackendError(f"HTTP {exc.code} from {self.base_url}") from exc
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise BackendError(f"request to {self.base_url} failed: {exc}") from exc
        return _response_text(data)


def _response_text(data: Any) -> str:
    try:
        if "choices" in data:
            return data["choices"][0]["message"]["content"]
        content = data["content"]
        if isinstance(content, str):
            return content
        return "".join(block.get("text", "") for block in content)
    except (KeyError, IndexError, TypeError) as exc:
        raise BackendError(f"unrecognized response shape: {str(data)[:200]}") from exc


class FixtureBackend(LlmBackend):
    """Replays responses from ``<case_id>.attempt<k>.txt`` files.

    A ``<mode>/`` subdirectory, when present, takes precedence so one
    fixture tree can script both prompt modes.
    """

    name = "mock"

    def __init__(self, directory):
        self.directory = Path(directory)

    def complete(self, prompt: str, *, case_id: str = "", attempt: int = 1, mode: str = "dcfix") -> str:
        fname = f"{case_id}.attempt{attempt}.txt"
        for candidate in (self.directory / mode / fname, self.directory / fname):
            if candidate.is_file():
                return candidate.read_text(encoding="utf-8")
        raise BackendError(f"no fixture {fname} in {self.directory}")


class ScriptedBackend(LlmBackend):
    """Calls ``responder(prompt, case_id, attempt, mode)``; raising is a backend error."""

    name = "scripted"

    def __init__(self, responder: Callable[[str, str, int, str], str]):
        self.responder = responder
        self.calls: list[tuple[str, int, str]] = []

    def complete(self, prompt: str, *, case_id: str = "", attempt: int = 1, mode: str = "dcfix") -> str:
        self.calls.append((case_id, attempt, mode))
        try:
            return self.responder(prompt, case_id, attempt, mode)
        except BackendError:
            raise
        except Exception as exc:
            raise BackendError(str(exc)) from exc


def load_backend_config(path) -> dict:
    with open(path, encoding="utf-8") as f:
        cfg = yaml.safe_load(f) or {}
    if not isinstance(cfg, dict):
        raise ValueError(f"backend config {path} must be a mapping")
    cfg.setdefault("_base_dir", str(Path(path).resolve().parent))
    return cfg


def make_backend(name: str, config: dict | None = None) -> LlmBackend:
    config = dict(config or {})
    base_dir = Path(config.pop("_base_dir", "."))
    if name == "mock":
        fixtures = config.get("fixtures")
        if not fixtures:
            raise ValueError("mock backend needs a 'fixtures' directory in its config")
        return FixtureBackend(base_dir / fixtures)
    if name == "http":
        for key in ("base_url", "model"):
            if not config.get(key):
                raise ValueError(f"http backend config is missing {key!r}")
        return HttpChatBackend(
            base_url=config["base_url"],
            model=config["model"],
            api_key_env=config.get("api_key_env"),
            timeout=float(config.get("timeout", DEFAULT_TIMEOUT)),
            temperature=config.get("temperature"),
            system_prompt=config.get("system_prompt"),
        )
    raise ValueError(f"unknown backend {name!r} (expected 'http' or 'mock')")
