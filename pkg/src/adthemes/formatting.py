"""Number formatting shared by report renderers."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal


def format_pct(value: float) -> str:
    """Percentage with two decimals, half-up, e.g. 33.885 -> '33.89'.

    Goes through the shortest decimal repr of the float so the result is
    stable across platforms.
    """
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
