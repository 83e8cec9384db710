"""Figures written next to the CSV reports."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 6.0

params = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.2,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}

# deterministic PNG bytes
_save_kw = {"metadata": {"Software": None}}


def _save(fig, path):
    fig.savefig(path, **_save_kw)
    plt.close(fig)
    return path


def plot_cross_sections(z, x_half, y_half, aspect, b, path):
    """Half-widths of the K_1 rectangles and their aspect ratio against height."""
    with plt.rc_context(params):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(2 * fig_width, fig_width * golden_mean))
        ax1.plot(z, x_half, label="x half-width")
        ax1.plot(z, y_half, label="y half-width")
        ax1.set_xlabel("height z")
        ax1.set_ylabel("half-width")
        ax1.legend(frameon=False)

        ax2.plot(z, aspect, color="k")
        ax2.axhline(1.0 / b, ls="--", color="0.5", label=f"limit 1/b = {1.0 / b:g}")
        ax2.set_xlabel("height z")
        ax2.set_ylabel("aspect ratio y : x")
        ax2.legend(frameon=False)
        return _save(fig, path)


def plot_escape_profile(s, U, jm_cum, k, bound, path):
    """Potential along an escaper against the 1/(k s) envelope, with the
    cumulative JM length against the certified bound."""
    s = np.asarray(s)
    with plt.rc_context(params):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(2 * fig_width, fig_width * golden_mean))
        ax1.semilogy(s, U, label="U along escaper")
        ss = s[s > 0]
        if ss.size:
            ax1.semilogy(ss, 1.0 / (k * ss), ls="--", color="0.5", label="envelope 1/(k s)")
        ax1.axhline(1.0, color="r", lw=0.8, label="Hill boundary")
        ax1.set_xlabel("arclength s")
        ax1.set_ylabel("U")
        ax1.legend(frameon=False)

        ax2.plot(s, jm_cum, color="k", label="cumulative JM length")
        ax2.axhline(bound, ls="--", color="0.5", label="certified bound")
        ax2.set_xlabel("arclength s")
        ax2.set_ylabel("JM length")
        ax2.legend(frameon=False)
        return _save(fig, path)
