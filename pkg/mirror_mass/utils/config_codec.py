# mirror_mass/utils/config_codec.py

from __future__ import annotations

import base64
import binascii
import json
import zlib
from dataclasses import dataclass
from typing import Any, Dict, Optional

# Run codes are '<scheme>.<fields>', dot separated:
#   mm2.<crc32 of the JSON, 8 hex>.<base64url(zlib(JSON))>   (default)
#   mm1.<base64url(JSON)>
PLAIN = "mm1"
PACKED = "mm2"

_INVALID = "Invalid run code."


def _crc(payload: bytes) -> str:
    return format(binascii.crc32(payload) & 0xFFFFFFFF, "08x")


def _to_text(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).decode("ascii").rstrip("=")


def _from_text(text: str) -> bytes:
    # strict alphabet; padding is dropped on the way out
    padded = text + "=" * (-len(text) % 4)
    return base64.b64decode(padded.encode("ascii"), altchars=b"-_", validate=True)


def _canonical_json(params: Dict[str, Any]) -> bytes:
    return json.dumps(
        params, sort_keys=True, ensure_ascii=False, separators=(",", ":")
    ).encode("utf-8")


@dataclass(frozen=True)
class RunCode:
    """A run code split into its fields, before the payload is unpacked."""

    scheme: str
    body: str
    checksum: Optional[str] = None

    @classmethod
    def parse(cls, code: str) -> "RunCode":
        scheme, _, rest = code.partition(".")
        if scheme == PACKED:
            checksum, dot, body = rest.partition(".")
            if not dot:
                raise ValueError(_INVALID)
            return cls(scheme, body, checksum.lower())
        if scheme == PLAIN:
            return cls(scheme, rest)
        raise ValueError("Unknown run code scheme.")

    def payload(self) -> bytes:
        raw = _from_text(self.body)
        if self.scheme == PLAIN:
            return raw
        json_bytes = zlib.decompress(raw)
        if _crc(json_bytes) != self.checksum:
            raise ValueError("Checksum mismatch")
        return json_bytes

    def __str__(self) -> str:
        if self.checksum is None:
            return f"{self.scheme}.{self.body}"
        return f"{self.scheme}.{self.checksum}.{self.body}"


def encode_config(params: Dict[str, Any], *, compress: bool = True) -> str:
    """
    Encode a run configuration as a URL-safe run code.

    Keys are sorted, so equal configurations always give equal codes.
    ``compress=False`` writes the plain mm1 form.
    """
    json_bytes = _canonical_json(params)
    if not compress:
        return str(RunCode(PLAIN, _to_text(json_bytes)))
    packed = _to_text(zlib.compress(json_bytes, level=9))
    return str(RunCode(PACKED, packed, _crc(json_bytes)))


def decode_config(encoded: str) -> Dict[str, Any]:
    """Decode a run code from encode_config(); raises ValueError on anything else."""
    if not isinstance(encoded, str) or not encoded.strip():
        raise ValueError("Run code must be a non-empty string.")
    code = RunCode.parse(encoded.strip())
    try:
        data = json.loads(code.payload().decode("utf-8"))
    except Exception as exc:  # noqa: BLE001
        raise ValueError(_INVALID) from exc
    if not isinstance(data, dict):
        raise ValueError("Decoded configuration is not a JSON object.")
    return data
