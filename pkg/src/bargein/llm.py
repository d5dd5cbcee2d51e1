"""Minimal chat-completion client shared by the external classifier and planner.

Configuration comes from a config mapping plus environment overrides:
BARGEIN_LLM_ENDPOINT, BARGEIN_LLM_MODEL, BARGEIN_LLM_API_KEY.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import httpx

from .types import BargeInError


class LlmError(BargeInError):
    """Transport failure, non-2xx status, or unusable response body."""


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model: str
    api_key: str | None = None
    timeout_s: float = 10.0


def llm_config_from_env(base: dict | None = None) -> LlmConfig | None:
    """Build an LlmConfig from a config mapping with environment overrides.

    Returns None when no endpoint is configured anywhere (external
    implementations are then unavailable).
    """
    base = base or {}
    endpoint = os.environ.get("BARGEIN_LLM_ENDPOINT", base.get("endpoint", ""))
    if not endpoint:
        return None
    return LlmConfig(
        endpoint=endpoint,
        model=os.environ.get("BARGEIN_LLM_MODEL", base.get("model", "")),
        api_key=os.environ.get("BARGEIN_LLM_API_KEY", base.get("api_key")),
        timeout_s=float(base.get("timeout_s", 10.0)),
    )


def chat_completion(cfg: LlmConfig, messages: list[dict], temperature: float = 0.0) -> str:
    """Single chat-completion call; returns the first choice's content.

    Raises:
        LlmError: on transport errors, HTTP errors, or a malformed body.
    """
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    body = {"model": cfg.model, "messages": messages, "temperature": temperature}
    try:
        response = httpx.post(cfg.endpoint, json=body, headers=headers, timeout=cfg.timeout_s)
        response.raise_for_status()
        data = response.json()
        content = data["choices"][0]["message"]["content"]
    except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
        raise LlmError(f"chat completion failed: {exc}") from exc
    if not isinstance(content, str) or not content.strip():
        raise LlmError("chat completion returned empty content")
    return content
