"""Report writers: delimited tables, JSON, and the companion figures.

Every report command emits the same content as TSV and JSON, plus a
rendered PNG next to them.  Output is byte-stable across reruns: keys are
sorted, floats are formatted explicitly and figures are written without
environment-dependent metadata.
"""

from __future__ import annotations

import json
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_RELATION_COLORS = "tab20"


def fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def write_tsv(path, headers: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(headers) + "\n")
        for row in rows:
            fh.write("\t".join(fmt(cell) for cell in row) + "\n")


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _save(fig, path) -> None:
    # Strip the Software tag so reruns are byte-identical.
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def metric_bars(path, rows: Mapping[str, Mapping[str, float | None]], title: str) -> None:
    """Grouped bar chart: one group per metric, one bar per model row."""
    metrics = sorted({m for values in rows.values() for m, v in values.items() if v is not None})
    if not metrics or not rows:
        return
    fig, ax = plt.subplots(figsize=(1.8 + 1.4 * len(metrics), 3.6))
    width = 0.8 / len(rows)
    for i, (name, values) in enumerate(rows.items()):
        offsets = [j + i * width for j in range(len(metrics))]
        ax.bar(
            offsets,
            [values.get(m) or 0.0 for m in metrics],
            width=width,
            label=name,
        )
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(metrics))])
    ax.set_xticklabels(metrics)
    ax.set_ylim(0, 1.0)
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    _save(fig, path)


def proportion_bars(
    path,
    profiles: Mapping[str, Mapping[str, Mapping[str, float]]],
    title: str,
) -> None:
    """Stacked relation-proportion bars, one subplot per PoS.

    ``profiles`` maps source name -> pos -> label -> proportion.
    """
    all_pos = sorted({pos for by_pos in profiles.values() for pos in by_pos})
    if not all_pos:
        return
    labels = sorted(
        {
            label
            for by_pos in profiles.values()
            for props in by_pos.values()
            for label in props
        }
    )
    cmap = plt.get_cmap(_RELATION_COLORS)
    colors = {label: cmap(i % cmap.N) for i, label in enumerate(labels)}
    fig, axes = plt.subplots(
        1, len(all_pos), figsize=(2.2 + 2.2 * len(all_pos), 4.0), squeeze=False
    )
    for ax, pos in zip(axes[0], all_pos):
        names = [name for name in profiles if pos in profiles[name]]
        for i, name in enumerate(names):
            bottom = 0.0
            for label in labels:
                value = profiles[name][pos].get(label, 0.0)
                if value == 0.0:
                    continue
                ax.bar(i, value, bottom=bottom, color=colors[label], width=0.7)
                bottom += value
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=45, ha="right", fontsize="small")
        ax.set_ylim(0, 1.0)
        ax.set_title(pos)
    handles = [plt.Rectangle((0, 0), 1, 1, color=colors[label]) for label in labels]
    fig.legend(
        handles,
        labels,
        loc="lower center",
        ncol=min(4, len(labels)),
        fontsize="x-small",
        frameon=False,
    )
    fig.suptitle(title)
    fig.tight_layout(rect=(0, 0.18, 1, 1))
    _save(fig, path)
