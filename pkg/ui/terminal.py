"""Rich terminal UI — tables, status lines, progress bars.

Everything here prints to stderr so that JSON reports on stdout stay clean.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Any, Iterator, Optional

from rich import box
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from engines.simulate import ProgressHook

console = Console(stderr=True)


def _num(x: Any) -> str:
    if x is None:
        return "—"
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.10g}"
    return str(x)


def show_error(text: str) -> None:
    """Show error message."""
    console.print(f"  ❌ {text}", style="bold red")


def show_success(text: str) -> None:
    """Show success message."""
    console.print(f"  ✅ {text}", style="bold green")


def show_info(text: str) -> None:
    console.print(f"  {text}", style="italic cyan")


# ── Reports ───────────────────────────────────────────────────

def _key_value_table(title: str, rows: list[tuple[str, Any]]) -> Table:
    table = Table(box=box.ROUNDED, title=title, title_style="bold cyan", show_header=False)
    table.add_column("Key", style="dim")
    table.add_column("Value", justify="right")
    for key, value in rows:
        table.add_row(key, _num(value))
    return table


def show_protocol_report(report: dict[str, Any]) -> None:
    """Summary of `protocol` plus the adequacy dof per rank."""
    rows = [
        ("rows m", report["m"]),
        ("dimension s", report["s"]),
        ("rank q of B", report["q"]),
        ("complete", "yes" if report["complete"] else "no"),
        ("unity I0", report["unity_intensity"]),
    ]
    console.print(_key_value_table(report["label"], rows))

    dof = Table(box=box.SIMPLE, title="adequacy test", title_style="bold")
    dof.add_column("r", justify="right")
    dof.add_column("dof", justify="right")
    dof.add_column("testable")
    for entry in report["adequacy"]:
        mark = "[green]yes[/green]" if entry["testable"] else "[dim]no[/dim]"
        dof.add_row(str(entry["r"]), str(entry["dof"]), mark)
    console.print(dof)


def show_bounds(report: dict[str, Any]) -> None:
    console.print(_key_value_table(
        f"bounds l={report['qubits']} r={report['r']}",
        [
            ("optimal minimum", report["optimal_min"]),
            ("polyhedron mixed minimum", report["polyhedron_mixed_min"]),
            ("ratio", report["ratio"]),
        ],
    ))


def show_extremes(label: str, l_min: float, l_max: float, certified: Optional[bool] = None) -> None:
    rows: list[tuple[str, Any]] = [("L min", l_min), ("L max", l_max)]
    if certified is not None:
        rows.append(("certified", "yes" if certified else "no"))
    console.print(_key_value_table(label, rows))


def show_summary(title: str, summary: dict[str, Any]) -> None:
    """Flat table of a JSON summary; nested dicts are flattened with dots."""
    rows: list[tuple[str, Any]] = []

    def flatten(prefix: str, data: dict[str, Any]) -> None:
        for key, value in data.items():
            name = f"{prefix}{key}"
            if isinstance(value, dict):
                flatten(f"{name}.", value)
            elif not isinstance(value, list):
                rows.append((name, value))

    flatten("", summary)
    console.print(_key_value_table(title, rows))


# ── Progress ──────────────────────────────────────────────────

@contextmanager
def progress_bar(label: str, total: int) -> Iterator[ProgressHook]:
    """Yields a hook that advances a bar by one step per call."""
    with Progress(
        TextColumn("  {task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task(label, total=total)

        def advance(_: int) -> None:
            progress.advance(task)

        yield advance
