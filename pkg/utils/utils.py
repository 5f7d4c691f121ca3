import json
from pathlib import Path

from rich import print
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

console = Console()


def log_step(title: str, payload=None, symbol: str = "🟢"):
    print(f"\n[b]{symbol} {title}[/b]")
    if payload:
        console.print(payload)


def log_error(message: str, err: Exception = None):
    print(f"\n[red]❌ {message}[/red]")
    if err:
        print(f"[dim]{type(err).__name__}: {str(err)}[/dim]")


def _flatten(block, prefix: str = "") -> list[tuple[str, object]]:
    if not isinstance(block, dict):
        return [(prefix or "value", block)]
    items = []
    for key, value in block.items():
        name = f"{prefix}.{key}" if prefix else str(key)
        items.extend(_flatten(value, name) if isinstance(value, dict) and value else [(name, value)])
    return items


def _compact(value, max_length: int = 120) -> str:
    if isinstance(value, list):
        text = "[" + ", ".join(_compact(v, max_length) for v in value) + "]"
    elif isinstance(value, float):
        text = f"{value:.6g}"
    else:
        text = str(value)
    return text if len(text) <= max_length else text[:max_length] + "..."


def log_json_block(title: str, block):
    """Nested config blocks as one ``section.key: value`` line each."""
    lines = [f"[bold cyan]{key}[/bold cyan]: {_compact(value)}" for key, value in _flatten(block)]
    panel = Panel("\n".join(lines), title=f"📌 {title}", title_align="left", border_style="cyan", expand=False)
    console.print(panel)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def render_records(rows: list[dict], title: str, limit: int = 40):
    """Rows of one result table; long sweeps show their first ``limit`` rows."""
    if not rows:
        print(f"[dim]{title}: no rows[/dim]")
        return
    table = Table(show_header=True, header_style="bold magenta", box=None)
    columns = list(rows[0].keys())
    for name in columns:
        table.add_column(name, style="cyan" if name == columns[0] else None, no_wrap=True)
    for row in rows[:limit]:
        table.add_row(*(_cell(row.get(name)) for name in columns))
    caption = f"{len(rows)} rows" if len(rows) <= limit else f"first {limit} of {len(rows)} rows"
    console.print(Panel(table, title=title, subtitle=caption, border_style="blue"))


def save_json_log(obj: dict, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2)
    print(f"\n[green]📝 Saved run log:[/green] {path}\n")
