"""Text formatting for reports and command output."""

from typing import List, Optional, Sequence, Union


def format_float(value: Optional[Union[int, float]], decimal_places: int = 3) -> str:
    """
    Format a number with a fixed number of decimals; None becomes "-".

    Examples:
        >>> format_float(0.32349)
        '0.323'
        >>> format_float(None)
        '-'
    """
    if value is None:
        return "-"
    return f"{value:.{decimal_places}f}"


def format_percent(value: Union[int, float], decimal_places: int = 1) -> str:
    """
    Format a fraction as a signed percentage.

    Examples:
        >>> format_percent(0.1234)
        '+12.3%'
        >>> format_percent(-0.05, decimal_places=0)
        '-5%'
    """
    return f"{value * 100:+.{decimal_places}f}%"


def format_weights(
    ids: Sequence[str], weights: Sequence[float], decimal_places: int = 3
) -> str:
    """
    One-line ``id=weight`` listing.

    Examples:
        >>> format_weights(["a", "b"], [0.25, 0.75])
        'a=0.250 b=0.750'
    """
    return " ".join(f"{i}={w:.{decimal_places}f}" for i, w in zip(ids, weights))


def format_table(headers: Sequence[str], rows: List[Sequence[str]]) -> str:
    """
    Plain-text table; the first column is left aligned, the others right.

    Examples:
        >>> print(format_table(["Plant", "nMAE"], [["p1", "0.300"]]))
        Plant   nMAE
        -----  -----
        p1     0.300
    """
    widths = [
        max(len(str(cell)) for cell in column) for column in zip(headers, *rows)
    ]

    def line(cells: Sequence[str]) -> str:
        parts = [
            str(c).ljust(w) if i == 0 else str(c).rjust(w)
            for i, (c, w) in enumerate(zip(cells, widths))
        ]
        return "  ".join(parts).rstrip()

    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(headers), rule] + [line(r) for r in rows])
