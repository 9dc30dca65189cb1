# tests/test_config_codec.py

import base64
import json

import pytest

from mirror_mass.utils.config_codec import decode_config, encode_config

PARAMS = {"a": 2.0, "traj": "eta = 0.2*tanh(tau/5)", "tau_end": "20/a", "threads": 0, "quick": False}


def test_compressed_code_round_trips():
    code = encode_config(PARAMS)
    assert code.startswith("mm2.")
    assert decode_config(code) == PARAMS


def test_plain_code_round_trips():
    code = encode_config(PARAMS, compress=False)
    assert code.startswith("mm1.")
    assert decode_config(code) == PARAMS


def test_code_is_independent_of_key_order():
    shuffled = dict(reversed(list(PARAMS.items())))
    assert encode_config(shuffled) == encode_config(PARAMS)


def test_code_is_url_safe():
    code = encode_config({"traj": "eta = " + "+".join(["sin(tau)"] * 40)})
    assert "=" not in code and "+" not in code and "/" not in code


def test_checksum_mismatch_is_rejected():
    scheme, crc, body = encode_config(PARAMS).split(".")
    bad_crc = f"{(int(crc, 16) ^ 1):08x}"
    with pytest.raises(ValueError, match="Invalid run code"):
        decode_config(f"{scheme}.{bad_crc}.{body}")


def test_non_object_payload_is_rejected():
    body = base64.urlsafe_b64encode(json.dumps([1, 2]).encode()).decode().rstrip("=")
    with pytest.raises(ValueError):
        decode_config(f"mm1.{body}")


@pytest.mark.parametrize("code", ["", "xx1.abc", "mm2.deadbeef", "mm1.!!!"])
def test_malformed_codes(code):
    with pytest.raises(ValueError):
        decode_config(code)
