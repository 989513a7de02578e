"""SVG figures with byte-stable output for fixed inputs."""

from __future__ import annotations

import io as _io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dynamics import STABLE, fixed_points_search  # noqa: E402
from .errors import EmptyTable, UnknownKind  # noqa: E402
from .io import atomic_write_text  # noqa: E402
from .model import field_G  # noqa: E402

KINDS = ("survival", "rbline", "timeline", "field3")
STABLE_GID = "stable-fixed-point"
OTHER_GID = "unstable-fixed-point"


def _svg(fig) -> str:
    buf = _io.StringIO()
    with plt.rc_context({"svg.hashsalt": "wageurn", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def survival_figure(curves: dict) -> str:
    """``curves`` maps a label to ``(thresholds, survival)``; log-log axes."""
    if not curves or all(len(t) == 0 for t, _ in curves.values()):
        raise EmptyTable("no survival data to plot")
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, (w, s) in curves.items():
        w, s = np.asarray(w), np.asarray(s)
        m = (w > 0) & (s > 0)
        ax.step(w[m], s[m], where="post", label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("wealth")
    ax.set_ylabel("1 - CDF")
    ax.legend()
    return _svg(fig)


def rbline_figure(beta, r) -> str:
    if len(beta) == 0:
        raise EmptyTable("no r-beta points to plot")
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(beta, r, "-")
    ax.set_xlabel("beta")
    ax.set_ylabel("optimal r")
    return _svg(fig)


def timeline_figure(t, winners, positive, grad_norm) -> str:
    if len(t) == 0:
        raise EmptyTable("no timeline rows to plot")
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    a1.plot(t, winners, label="share > wage share")
    a1.plot(t, positive, label="G_i > 0")
    a1.set_ylabel("agents")
    a1.legend()
    a2.semilogy(t, grad_norm)
    a2.set_ylabel("|G|")
    a2.set_xlabel("t")
    return _svg(fig)


def _to_plane(x):
    x = np.atleast_2d(x)
    return x[:, 1] + 0.5 * x[:, 2], np.sqrt(3) / 2 * x[:, 2]


def field3_figure(params, n_grid: int = 18, fixed_points=None) -> str:
    """Simplex quiver of the field for three agents with fixed points marked."""
    if params.A != 3:
        raise ValueError("field3 needs exactly three agents")
    if fixed_points is None:
        fixed_points = fixed_points_search(params)
    pts, vecs = [], []
    for i in range(1, n_grid):
        for j in range(1, n_grid - i):
            x = np.array([i, j, n_grid - i - j]) / n_grid
            pts.append(x)
            vecs.append(field_G(x, params))
    pts, vecs = np.array(pts), np.array(vecs)
    px, py = _to_plane(pts)
    # linear map, so field vectors project the same way as points (minus the origin)
    vx, vy = vecs[:, 1] + 0.5 * vecs[:, 2], np.sqrt(3) / 2 * vecs[:, 2]

    fig, ax = plt.subplots(figsize=(5, 4.6))
    ax.plot([0, 1, 0.5, 0], [0, 0, np.sqrt(3) / 2, 0], "k-", lw=0.8)
    ax.quiver(px, py, vx, vy, angles="xy", color="0.4")
    k_st = k_un = 0
    for fp in fixed_points:
        fx, fy = _to_plane(fp.x)
        if fp.stability == STABLE:
            (h,) = ax.plot(fx, fy, "o", color="tab:red", ms=8)
            h.set_gid(f"{STABLE_GID}-{k_st}")
            k_st += 1
        else:
            (h,) = ax.plot(fx, fy, "o", mfc="none", mec="tab:blue", ms=8)
            h.set_gid(f"{OTHER_GID}-{k_un}")
            k_un += 1
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(f"r={params.r:g}, beta={params.beta:g}")
    return _svg(fig)


def write_svg(path, svg: str):
    return atomic_write_text(path, svg)


def count_marked_stable(svg: str) -> int:
    return svg.count(f'id="{STABLE_GID}-')


def check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise UnknownKind(f"unknown plot kind {kind!r}; choose from {', '.join(KINDS)}")
    return kind
