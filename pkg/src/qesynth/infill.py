"""Mask infillers: local stand-ins for a masked LM and a fill-mask HTTP client.

Every infiller maps a :class:`~qesynth.synth.MaskedDraft` to a token list of
the same length in which each mask became exactly one token and every
concrete token is kept verbatim.

Remote wire format, one record per request::

    POST {endpoint}   {"source": [...], "draft": [... "<mask>" ...]}
    200               {"tokens": [...]}
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import TYPE_CHECKING, Mapping, Optional, Protocol, Sequence

import numpy as np

if TYPE_CHECKING:
    from qesynth.synth import MaskedDraft

logger = logging.getLogger(__name__)

MASK_TOKEN = "<mask>"
SENTINEL = "<unk>"
ENDPOINT_ENV = "QESYNTH_INFILL_ENDPOINT"


class InfillError(RuntimeError):
    """An infiller failed on a record; ``index`` identifies it when known."""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        super().__init__(message if index is None else f"record {index}: {message}")


class InfillProtocolError(InfillError):
    """The infiller returned output violating the one-token-per-mask contract."""


class Infiller(Protocol):
    def fill(
        self,
        source: Sequence[str],
        draft: "MaskedDraft",
        rng: Optional[np.random.Generator] = None,
    ) -> list[str]: ...


def check_fill(draft: "MaskedDraft", tokens: Sequence[str], index: Optional[int] = None) -> list[str]:
    """Validate infiller output against ``draft``; raise :class:`InfillProtocolError`."""
    tokens = list(tokens)
    if len(tokens) != len(draft.tokens):
        raise InfillProtocolError(
            f"expected {len(draft.tokens)} tokens, got {len(tokens)}", index
        )
    for pos, (want, got) in enumerate(zip(draft.tokens, tokens)):
        if not isinstance(got, str) or not got or got == MASK_TOKEN or got.split() != [got]:
            raise InfillProtocolError(f"position {pos} left unfilled or invalid: {got!r}", index)
        if want is not None and got != want:
            raise InfillProtocolError(
                f"position {pos} changed concrete token {want!r} to {got!r}", index
            )
    return tokens


def load_vocab_table(path) -> dict[str, float]:
    """Two-column TSV ``token<TAB>weight``."""
    table = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected token<TAB>weight")
            try:
                table[parts[0]] = float(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad weight {parts[1]!r}") from None
    return table


class UnigramInfiller:
    """Fill each mask with an independent weighted draw from a vocabulary."""

    def __init__(self, vocab_table: Mapping[str, float], seed: int = 0):
        if not vocab_table:
            raise ValueError("empty vocabulary")
        for tok, w in vocab_table.items():
            if not (w > 0 and np.isfinite(w)):
                raise ValueError(f"weight for {tok!r} must be positive, got {w}")
            if tok.split() != [tok] or tok == MASK_TOKEN:
                raise ValueError(f"invalid vocabulary token {tok!r}")
        self.tokens = list(vocab_table)
        weights = np.array([vocab_table[t] for t in self.tokens], dtype=np.float64)
        self._cdf = np.cumsum(weights / weights.sum())
        self._cdf[-1] = 1.0
        self.seed = seed

    @classmethod
    def from_sentences(cls, sentences, seed: int = 0) -> "UnigramInfiller":
        counts: dict[str, float] = {}
        for sent in sentences:
            for tok in sent:
                counts[tok] = counts.get(tok, 0.0) + 1.0
        return cls(counts, seed)

    def fill(self, source, draft, rng=None):
        holes = [i for i, t in enumerate(draft.tokens) if t is None]
        out = list(draft.tokens)
        if not holes:
            return out
        if rng is None:
            rng = np.random.default_rng(self.seed)
        picks = np.searchsorted(self._cdf, rng.random(len(holes)), side="right")
        for pos, k in zip(holes, picks.tolist()):
            out[pos] = self.tokens[min(k, len(self.tokens) - 1)]
        return out


class IdentityInfiller:
    """Restore substituted tokens from the draft's origin map; inserted masks become ``<unk>``.

    Useful for checking tag bookkeeping: restored substitutions must align as
    matches.
    """

    def __init__(self, sentinel: str = SENTINEL):
        self.sentinel = sentinel

    def fill(self, source, draft, rng=None):
        out = []
        for tok, origin in zip(draft.tokens, draft.origins):
            if tok is not None:
                out.append(tok)
            elif origin is not None:
                out.append(draft.original[origin])
            else:
                out.append(self.sentinel)
        return out


@dataclass(frozen=True)
class RemoteInfillConfig:
    endpoint: str
    timeout: float = 10.0
    max_retries: int = 3
    batch_size: int = 8
    backoff: float = 0.1

    def __post_init__(self):
        if not self.endpoint:
            raise ValueError("endpoint is required")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    @classmethod
    def from_env(cls, endpoint: Optional[str] = None, **kwargs) -> "RemoteInfillConfig":
        endpoint = os.environ.get(ENDPOINT_ENV) or endpoint
        if not endpoint:
            raise ValueError(f"no endpoint given and {ENDPOINT_ENV} is unset")
        return cls(endpoint=endpoint, **kwargs)


class RemoteInfiller:
    """Client for a fill-mask service speaking the JSON protocol above.

    Non-200 responses and network errors are retried with exponential
    backoff; malformed payloads are protocol errors and are not retried.
    """

    def __init__(self, config: RemoteInfillConfig):
        self.config = config

    def _post(self, payload: bytes, index: Optional[int]) -> dict:
        cfg = self.config
        last = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(cfg.backoff * 2 ** (attempt - 1))
            req = urllib.request.Request(
                cfg.endpoint,
                data=payload,
                headers={"Content-Type": "application/json"},
                method="POST",
            )
            try:
                with urllib.request.urlopen(req, timeout=cfg.timeout) as resp:
                    body = resp.read()
                    if resp.status != 200:
                        last = f"HTTP {resp.status}"
                        continue
            except urllib.error.HTTPError as exc:
                last = f"HTTP {exc.code}"
                continue
            except (urllib.error.URLError, OSError) as exc:
                last = str(getattr(exc, "reason", exc))
                continue
            try:
                return json.loads(body)
            except json.JSONDecodeError:
                raise InfillProtocolError("response is not JSON", index) from None
        raise InfillError(
            f"{cfg.endpoint} failed after {cfg.max_retries + 1} attempts ({last})", index
        )

    def fill(self, source, draft, rng=None, index: Optional[int] = None):
        if draft.n_masks == 0:
            return list(draft.tokens)
        payload = json.dumps(
            {"source": list(source), "draft": draft.wire_tokens()}, ensure_ascii=False
        ).encode("utf-8")
        resp = self._post(payload, index)
        tokens = resp.get("tokens") if isinstance(resp, dict) else None
        if not isinstance(tokens, list):
            raise InfillProtocolError("response lacks a 'tokens' list", index)
        return check_fill(draft, tokens, index)

    def fill_batch(self, items, indices=None) -> list[list[str]]:
        """Fill ``(source, draft)`` items with up to ``batch_size`` requests in flight.

        Results are returned in input order regardless of completion order.
        """
        items = list(items)
        indices = list(range(len(items))) if indices is None else list(indices)
        results: list = [None] * len(items)
        with ThreadPoolExecutor(max_workers=self.config.batch_size) as pool:
            futures = [
                pool.submit(self.fill, src, draft, None, idx)
                for (src, draft), idx in zip(items, indices)
            ]
            for k, fut in enumerate(futures):
                results[k] = fut.result()
        return results


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        server = self.server
        length = int(self.headers.get("Content-Length", 0))
        try:
            req = json.loads(self.rfile.read(length))
            draft = req["draft"]
        except (json.JSONDecodeError, KeyError, TypeError):
            self.send_error(400)
            return
        with server.lock:
            server.requests += 1
            fail = server.fail_first > 0
            if fail:
                server.fail_first -= 1
        if fail:
            self.send_error(503)
            return
        tokens = [server.fill_token if t == MASK_TOKEN else t for t in draft]
        if server.residual_mask and MASK_TOKEN in draft:
            tokens[draft.index(MASK_TOKEN)] = MASK_TOKEN
        body = json.dumps({"tokens": tokens}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, format, *args):
        pass


class StubFillMaskServer:
    """In-process fill-mask service for tests and offline runs.

    Replaces every mask with ``fill_token``. ``residual_mask`` leaves one mask
    in the reply and ``fail_first`` answers the first N requests with 503.

    >>> with StubFillMaskServer(fill_token="w") as srv:   # doctest: +SKIP
    ...     RemoteInfiller(RemoteInfillConfig(srv.url)).fill(src, draft)
    """

    def __init__(self, fill_token: str = "w", residual_mask: bool = False, fail_first: int = 0):
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self._httpd.daemon_threads = True
        self._httpd.fill_token = fill_token
        self._httpd.residual_mask = residual_mask
        self._httpd.fail_first = fail_first
        self._httpd.requests = 0
        self._httpd.lock = threading.Lock()
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}/fill"

    @property
    def requests(self) -> int:
        return self._httpd.requests

    def start(self):
        self._thread.start()
        return self

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()
