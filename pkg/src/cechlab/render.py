"""SVG rendering of planar clouds with their r- and theta*r-balls."""

from __future__ import annotations

import math
from pathlib import Path

from .errors import ConfigurationError
from .geometry import PointCloud

_LIGHT_FILL = "#c5d9ee"
_DARK_FILL = "#2f5f8f"
_CANVAS_WIDTH = 640.0


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def render_balls(cloud: PointCloud, r: float, theta: float, path: str | Path,
                 box: tuple[tuple[float, float], tuple[float, float]] | None = None,
                 ) -> Path:
    """Write an SVG with light theta*r disks underneath dark r disks.

    Planar clouds only. The viewBox is fitted to `box` when given
    (typically the sampling box) and to the padded point bounds
    otherwise; the vertical axis points up as in the plane, so disk
    centers are mirrored into SVG's downward y.
    """
    if cloud.dim != 2:
        raise ConfigurationError(f"ball rendering supports d=2 only, got d={cloud.dim}")
    if not (math.isfinite(r) and r >= 0.0):
        raise ConfigurationError(f"radius must be nonnegative and finite, got {r}")
    if not (math.isfinite(theta) and theta >= 1.0):
        raise ConfigurationError(f"persistence factor must satisfy theta >= 1, got {theta}")
    if box is not None:
        (x_lo, x_hi), (y_lo, y_hi) = ((float(a), float(b)) for a, b in box)
        if not (x_lo < x_hi and y_lo < y_hi):
            raise ConfigurationError(f"degenerate rendering box {box}")
    elif len(cloud) > 0:
        pad = 1.05 * theta * r + 1e-3
        x_lo = float(cloud.points[:, 0].min()) - pad
        x_hi = float(cloud.points[:, 0].max()) + pad
        y_lo = float(cloud.points[:, 1].min()) - pad
        y_hi = float(cloud.points[:, 1].max()) + pad
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    width = x_hi - x_lo
    height = y_hi - y_lo
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{_fmt(_CANVAS_WIDTH)}" height="{_fmt(_CANVAS_WIDTH * height / width)}" '
        f'viewBox="{_fmt(x_lo)} {_fmt(y_lo)} {_fmt(width)} {_fmt(height)}">',
    ]
    # Mirror y inside the viewBox so the plane's y axis points up.
    def circle(x: float, y: float, radius: float, fill: str) -> str:
        cy = y_lo + y_hi - y
        return (f'  <circle cx="{_fmt(x)}" cy="{_fmt(cy)}" r="{_fmt(radius)}" '
                f'fill="{fill}"/>')

    for x, y in cloud.points:
        lines.append(circle(float(x), float(y), theta * r, _LIGHT_FILL))
    for x, y in cloud.points:
        lines.append(circle(float(x), float(y), r, _DARK_FILL))
    lines.append("</svg>")
    out = Path(path)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out
