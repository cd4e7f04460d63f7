"""HTTP client for a remote policy. Implements the same answer() contract."""
from __future__ import annotations

import requests

from .protocol import (PolicyRequest, PolicyResponse, request_to_dict,
                       response_from_dict)

DEFAULT_TIMEOUT_S = 60.0
MAX_TRANSPORT_ATTEMPTS = 3


class PolicyClientError(RuntimeError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class RemotePolicy:
    """Talks to a PolicyServer (or anything speaking the same protocol).

    Transport failures (refused connection, timeout) are retried up to
    min(attempts, 3) total attempts; protocol-level errors are not retried.
    """

    name = "remote"

    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT_S,
                 attempts: int = MAX_TRANSPORT_ATTEMPTS):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.attempts = max(1, min(attempts, MAX_TRANSPORT_ATTEMPTS))
        self._session = requests.Session()

    def answer(self, request: PolicyRequest) -> PolicyResponse:
        url = f"{self.base_url}/infer"
        payload = request_to_dict(request)
        last_exc: Exception | None = None
        for _ in range(self.attempts):
            try:
                resp = self._session.post(url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                continue
            if resp.status_code == 200:
                return response_from_dict(resp.json())
            raise PolicyClientError(
                f"inference failed with HTTP {resp.status_code}: {resp.text[:200]}",
                status=resp.status_code)
        raise PolicyClientError(
            f"transport failed after {self.attempts} attempts: {last_exc}")

    def health(self) -> dict:
        try:
            resp = self._session.get(f"{self.base_url}/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise PolicyClientError(f"health check failed: {exc}") from exc
        if resp.status_code != 200:
            raise PolicyClientError(f"health check returned HTTP {resp.status_code}",
                                    status=resp.status_code)
        return resp.json()

    def close(self) -> None:
        self._session.close()
