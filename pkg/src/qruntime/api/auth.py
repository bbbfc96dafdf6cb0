"""Pluggable bearer-token verification.

The default verifier reads a JSON file mapping token -> user name. Swap in
any object with `verify(token) -> user | None` for other identity schemes.
Without a token file the platform runs with a single development token.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..config import DEV_TOKEN, DEV_USER, PlatformConfig


class TokenVerifier:
    def verify(self, token: str) -> str | None:
        raise NotImplementedError


class StaticTokenVerifier(TokenVerifier):
    def __init__(self, tokens: dict[str, str]):
        self._tokens = dict(tokens)

    @staticmethod
    def from_file(path: str | Path) -> "StaticTokenVerifier":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
            raise ValueError(f"{path}: expected a JSON object mapping token -> user")
        return StaticTokenVerifier(data)

    def verify(self, token: str) -> str | None:
        return self._tokens.get(token)


def load_verifier(config: PlatformConfig) -> TokenVerifier:
    if config.token_file:
        return StaticTokenVerifier.from_file(config.token_file)
    return StaticTokenVerifier({DEV_TOKEN: DEV_USER})
