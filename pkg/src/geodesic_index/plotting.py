"""PNG figures: iterated indices against the mean-index line, and Betti tables."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .iteration import index_iterate, nullity_iterate, mean_index  # noqa: E402


def plot_iterates(records, m_values, path):
    """i(c^m) and i(c^m) + nu(c^m) per record, with the line m * mean index."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for rec in records:
        seed = rec.seed
        idx = [index_iterate(seed, m) for m in m_values]
        top = [i + nullity_iterate(seed, m) for i, m in zip(idx, m_values)]
        slope = float(mean_index(seed))
        line, = ax.plot(m_values, idx, "o", ms=3, label=f"{rec.name}: i")
        ax.plot(m_values, top, "^", ms=3, color=line.get_color(), alpha=0.5, label=f"{rec.name}: i + nu")
        ax.plot(m_values, [slope * m for m in m_values], "-", lw=0.8, color=line.get_color())
    ax.set_xlabel("iterate m")
    ax.set_ylabel("index")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_betti(betti_values, path, morse_values=None, n=None):
    """Bars of b_q, optionally next to M_q."""
    q = list(range(len(betti_values)))
    fig, ax = plt.subplots(figsize=(8, 3.5))
    if morse_values is None:
        ax.bar(q, betti_values, width=0.8, label="b_q")
    else:
        ax.bar([x - 0.2 for x in q], betti_values, width=0.4, label="b_q")
        ax.bar([x + 0.2 for x in q], morse_values, width=0.4, label="M_q")
        for x, (b, m) in enumerate(zip(betti_values, morse_values)):
            if m < b:
                ax.plot(x, b + 0.15, "v", color="red", ms=5)
    ax.set_xlabel("degree q")
    ax.set_title(f"S^{n}" if n else "")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
