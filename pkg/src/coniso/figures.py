"""Report figures: headless matplotlib renderings next to the data files.

Every function takes explicit data plus an output path and returns the
path; nothing touches an interactive backend, so the CLI can run on
machines without a display.
"""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _wall_rays(ax, cn, rmax):
    if cn.kind == "full":
        return
    lo, hi = cn.angle_intervals()[0]
    for ang in (lo, hi):
        ax.plot([0, rmax * np.cos(ang)], [0, rmax * np.sin(ang)], color="0.4", lw=1.0)


def domain_figure(dom, w, path, title=""):
    """Planar cap profile with the unit cap ball for comparison."""
    cn = dom.grid.cone
    theta = dom.grid.angles[:, 0]
    order = np.argsort(theta)
    theta = theta[order]
    r = dom.radii[order]
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    ax.plot(r * np.cos(theta), r * np.sin(theta), lw=1.8, label="profile")
    ax.plot(np.cos(theta), np.sin(theta), ls="--", lw=1.0, color="0.5", label="unit cap")
    _wall_rays(ax, cn, 1.15 * float(r.max()))
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def history_figure(history, q_ball, path):
    """Best-so-far quotient against the ball value, per evaluation."""
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    h = np.asarray(history, dtype=float)
    ax.plot(h, lw=1.4)
    ax.axhline(q_ball, color="crimson", ls="--", lw=1.0, label="cap ball")
    ax.set_xlabel("evaluation")
    ax.set_ylabel("best quotient")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def scan_figure(scan, path):
    """Deficit and curvature classification across the opening angle."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.2, 5.4), sharex=True)
    ax1.axhline(0.0, color="0.6", lw=0.8)
    ax1.plot(scan.betas, scan.deficits, "o-", ms=3.5, lw=1.2)
    ax1.set_ylabel("best deficit")
    ax2.axhline(0.0, color="0.6", lw=0.8)
    ax2.plot(scan.betas, scan.c2_min, "s-", ms=3.5, lw=1.2, color="darkorange")
    ax2.set_ylabel("min second variation")
    ax2.set_xlabel("opening angle")
    if scan.bracket is not None:
        for ax in (ax1, ax2):
            ax.axvspan(scan.bracket[0], scan.bracket[1], color="crimson", alpha=0.18)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def field_figure(sol, path):
    """Solution field u over the mesh, with the contact boundary nodes."""
    fig, ax = plt.subplots(figsize=(5.6, 5.0))
    tri = ax.tricontourf(sol.points[:, 0], sol.points[:, 1], sol.u, levels=24)
    fig.colorbar(tri, ax=ax, shrink=0.85, label="u")
    bd = sol.points[sol.is_boundary]
    ax.plot(bd[:, 0], bd[:, 1], ".", ms=1.5, color="black")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
