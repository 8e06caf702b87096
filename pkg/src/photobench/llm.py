"""LLM clients for the discovery loop.

Two implementations share the call contract ``client.complete(prompt) -> str``:

  * ``HttpLLMClient`` posts to a chat-completion endpoint
    (``POST {base_url}/chat/completions``); the API key is read from an
    environment variable, never from config files.
  * ``MockLLMClient`` replays responses from a script file, for tests and
    offline runs. Responses are separated by lines equal to ``%%%``; once
    exhausted, the last response repeats.
"""

from __future__ import annotations

import os
from pathlib import Path

__all__ = ["LLMError", "HttpLLMClient", "MockLLMClient", "SCRIPT_SEPARATOR"]

SCRIPT_SEPARATOR = "%%%"


class LLMError(RuntimeError):
    """The client could not produce a response."""


class HttpLLMClient:
    """Minimal chat-completion client (OpenAI-style request/response shape)."""

    def __init__(self, base_url: str, model: str, api_key_env: str = "PHOTOBENCH_LLM_KEY",
                 temperature: float = 1.0, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.temperature = temperature
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        import requests

        key = os.environ.get(self.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            resp = requests.post(f"{self.base_url}/chat/completions", json=payload,
                                 headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise LLMError(f"chat completion request failed: {exc}") from exc


class MockLLMClient:
    """Deterministic scripted client.

    ``script`` is either a list of response strings or a path to a file in
    which responses are separated by ``%%%`` lines. Prompts received are
    kept on ``self.prompts`` for assertions.
    """

    def __init__(self, script):
        if isinstance(script, (str, Path)):
            text = Path(script).read_text(encoding="utf-8")
            parts, current = [], []
            for line in text.splitlines():
                if line.strip() == SCRIPT_SEPARATOR:
                    parts.append("\n".join(current))
                    current = []
                else:
                    current.append(line)
            parts.append("\n".join(current))
            responses = [p for p in parts if p.strip()]
        else:
            responses = list(script)
        if not responses:
            raise ValueError("mock script contains no responses")
        self.responses = responses
        self.calls = 0
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        idx = min(self.calls, len(self.responses) - 1)
        self.calls += 1
        return self.responses[idx]
