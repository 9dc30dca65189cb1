# mirror_mass/utils/unit_parser.py

from typing import Optional


def parse_proper_time(input_str, a: Optional[float] = None) -> float:
    """
    Parse strings like '20/a', '0.5 / a', '-200', '1e-3/a', '2.5' into a proper time.
    Values carrying the '/a' suffix are in units of the inverse coupling and need `a`.
    Plain numbers (int/float) pass through unchanged.
    Raises ValueError on bad input.

    Examples:
        '20/a', a=2  -> 10.0
        '-200'       -> -200.0
        '1e-3/a', a=1 -> 0.001
    """
    if isinstance(input_str, (int, float)) and not isinstance(input_str, bool):
        return float(input_str)
    if not input_str or not isinstance(input_str, str):
        raise ValueError("Proper time must be a number or a non-empty string.")

    text = input_str.strip().replace(" ", "").lower()
    if text.endswith("/a"):
        if a is None:
            raise ValueError(f"'{input_str}' is given in units of 1/a but no coupling was set.")
        if a <= 0:
            raise ValueError("a must be > 0")
        num_str, factor = text[:-2], 1.0 / a
    else:
        num_str, factor = text, 1.0

    try:
        value = float(num_str)
    except ValueError:
        raise ValueError(f"Could not parse proper time from input: '{input_str}'")

    return value * factor


def format_proper_time(tau: float, a: Optional[float] = None, precision: int = 6) -> str:
    """
    Render a proper time, in units of 1/a when a coupling is given.

    Examples:
        10.0, a=2 -> '20/a'
        -200.0    -> '-200'
    """
    value = tau * a if a is not None else tau
    value = round(value, precision)
    if value == int(value):
        value = int(value)
    return f"{value}/a" if a is not None else f"{value}"
