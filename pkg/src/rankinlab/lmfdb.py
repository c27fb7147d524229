"""Minimal LMFDB client for classical-newform coefficients.

Fetches trace data for a newform label from the LMFDB REST API, converts
to Deligne-normalized eigenvalues, and persists every raw response under
the cache directory so repeated loads are served locally and
bit-identically. Requests are rate-limited to one per second with
exponential backoff on transient failures.

Only rational newforms (one-dimensional Hecke orbits) are supported: for
those the stored traces are the Hecke eigenvalues themselves.
"""

from __future__ import annotations

import json
import math
import os
import threading
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .forms import CuspForm, MalformedData

__all__ = ["NetworkError", "UnknownLabel", "fetch_newform", "default_cache_dir"]

DEFAULT_BASE_URL = "https://www.lmfdb.org"
_RATE_SECONDS = 1.0
_RETRIES = 3

_lock = threading.Lock()
_last_request = 0.0


class NetworkError(RuntimeError):
    """The service could not be reached after retries."""


class UnknownLabel(KeyError):
    """The service knows no newform with the requested label."""


def default_cache_dir() -> Path:
    env = os.environ.get("RANKINLAB_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "rankinlab"


def _http_get(url: str) -> tuple[int, str]:
    import requests

    resp = requests.get(url, timeout=30)
    return resp.status_code, resp.text


def _rate_limited_fetch(url: str, fetcher) -> tuple[int, str]:
    global _last_request
    delay = 1.0
    for attempt in range(_RETRIES):
        with _lock:
            wait = _RATE_SECONDS - (time.monotonic() - _last_request)
            if wait > 0:
                time.sleep(wait)
            _last_request = time.monotonic()
        try:
            status, text = fetcher(url)
        except Exception as exc:
            if attempt == _RETRIES - 1:
                raise NetworkError(f"GET {url} failed: {exc}") from exc
            time.sleep(delay)
            delay *= 2
            continue
        if status >= 500:
            if attempt == _RETRIES - 1:
                raise NetworkError(f"GET {url} -> {status}")
            time.sleep(delay)
            delay *= 2
            continue
        return status, text
    raise NetworkError(f"GET {url}: retries exhausted")


def _cache_path(cache_dir, label: str) -> Path:
    root = Path(cache_dir) if cache_dir else default_cache_dir()
    return root / f"mf_newform_{label}.json"


def fetch_newform(label: str, base_url: str | None = None,
                  cache_dir=None, n_max: int | None = None,
                  fetcher=None) -> CuspForm:
    """CuspForm for an LMFDB classical-newform label, e.g. '11.2.a.a'.

    The raw JSON response is cached; a cached label never touches the
    network again. `fetcher(url) -> (status, text)` is injectable for
    testing and offline stores.
    """
    path = _cache_path(cache_dir, label)
    if path.exists():
        payload = path.read_text()
    else:
        base = (base_url or os.environ.get("RANKINLAB_LMFDB_URL")
                or DEFAULT_BASE_URL).rstrip("/")
        url = f"{base}/api/mf_newforms/?label={label}&_format=json"
        status, payload = _rate_limited_fetch(url, fetcher or _http_get)
        if status == 404:
            raise UnknownLabel(label)
        if status != 200:
            raise NetworkError(f"GET {url} -> {status}")
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(payload)
        tmp.replace(path)  # idempotent: atomic rename, same bytes each time
    return _newform_from_json(label, payload, n_max)


def _newform_from_json(label: str, payload: str, n_max: int | None) -> CuspForm:
    try:
        doc = json.loads(payload)
    except json.JSONDecodeError as exc:
        raise MalformedData(f"{label}: response is not JSON ({exc})") from exc
    rows = doc.get("data")
    if not rows:
        raise UnknownLabel(label)
    row = rows[0]
    for key in ("level", "weight", "traces"):
        if key not in row:
            raise MalformedData(f"{label}: missing field '{key}'")
    dim = row.get("dim", 1)
    if dim != 1:
        raise MalformedData(
            f"{label}: field 'dim' = {dim}; only rational newforms (dim 1) "
            "carry eigenvalues in their traces")
    level = int(row["level"])
    weight = int(row["weight"])
    traces = row["traces"]
    if not isinstance(traces, list) or not traces:
        raise MalformedData(f"{label}: field 'traces' empty or not a list")
    if n_max is not None:
        traces = traces[:n_max]
    lam = np.zeros(len(traces) + 1)
    half = (weight - 1) // 2  # weight even: n^{(k-1)/2} = n^half * sqrt(n)
    for i, a in enumerate(traces, start=1):
        lam[i] = float(Fraction(int(a), i**half)) / math.sqrt(i)
    return CuspForm("holomorphic", level, weight, None, lam, True, label)
