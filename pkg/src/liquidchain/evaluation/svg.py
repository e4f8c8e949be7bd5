"""Minimal SVG line and bar charts."""

from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


class Frame:
    def __init__(self, x0, y0, width, height, xlim, ylim):
        self.x0, self.y0, self.w, self.h = x0, y0, width, height
        self.xlim, self.ylim = xlim, ylim

    def x(self, v):
        lo, hi = self.xlim
        return self.x0 + (v - lo) / ((hi - lo) or 1.0) * self.w

    def y(self, v):
        lo, hi = self.ylim
        return self.y0 + self.h - (v - lo) / ((hi - lo) or 1.0) * self.h


def _axes(frame, title, xlabel, ylabel):
    parts = [
        f'<rect x="{frame.x0}" y="{frame.y0}" width="{frame.w}" height="{frame.h}" '
        'fill="none" stroke="#333"/>',
        f'<text x="{frame.x0 + frame.w / 2:.1f}" y="{frame.y0 - 8}" text-anchor="middle" '
        f'font-size="13">{escape(title)}</text>',
        f'<text x="{frame.x0 + frame.w / 2:.1f}" y="{frame.y0 + frame.h + 30}" '
        f'text-anchor="middle" font-size="11">{escape(xlabel)}</text>',
    ]
    for v in (frame.ylim[0], 0.5 * sum(frame.ylim), frame.ylim[1]):
        parts.append(f'<text x="{frame.x0 - 4}" y="{frame.y(v) + 4:.1f}" text-anchor="end" '
                     f'font-size="9">{v:,.0f}</text>')
    parts.append(f'<text x="{frame.x0 - 48}" y="{frame.y0 - 8}" font-size="10">'
                 f'{escape(ylabel)}</text>')
    return parts


def _document(width, height, body):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n<rect width="100%" height="100%" fill="white"/>\n'
            + "\n".join(body) + "\n</svg>\n")


def band_panels(panels, path, xlabel="day", ylabel="cumulative profit"):
    """One panel per entry of ``panels``: ``(title, {series: (x, mean, sd)})``."""
    pw, ph, margin = 320, 220, 70
    width = margin + len(panels) * (pw + margin)
    height = ph + 2 * margin + 20
    body = []
    names = []
    for p, (title, series) in enumerate(panels):
        ys = [v for _, (x, m, s) in series.items() for v in list(m - s) + list(m + s)]
        xs = [v for _, (x, m, s) in series.items() for v in x]
        frame = Frame(margin + p * (pw + margin), margin, pw, ph,
                      (min(xs), max(xs)), (min(ys), max(ys)))
        body += _axes(frame, title, xlabel, ylabel)
        for k, (name, (x, m, s)) in enumerate(sorted(series.items())):
            color = PALETTE[k % len(PALETTE)]
            upper = " ".join(f"{frame.x(a):.1f},{frame.y(b):.1f}" for a, b in zip(x, m + s))
            lower = " ".join(f"{frame.x(a):.1f},{frame.y(b):.1f}"
                             for a, b in zip(x[::-1], (m - s)[::-1]))
            body.append(f'<polygon points="{upper} {lower}" fill="{color}" fill-opacity="0.2" '
                        'stroke="none"/>')
            line = " ".join(f"{frame.x(a):.1f},{frame.y(b):.1f}" for a, b in zip(x, m))
            body.append(f'<polyline points="{line}" fill="none" stroke="{color}" '
                        'stroke-width="1.5"/>')
            if name not in names:
                names.append(name)
    for k, name in enumerate(names):
        color = PALETTE[k % len(PALETTE)]
        y = height - 18
        x = margin + k * 120
        body.append(f'<rect x="{x}" y="{y - 9}" width="12" height="10" fill="{color}"/>')
        body.append(f'<text x="{x + 16}" y="{y}" font-size="11">{escape(str(name))}</text>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_document(width, height, body))


def grouped_bars(groups, path, title, ylabel="cumulative profit"):
    """Bars for ``{group label: {series name: value}}``."""
    labels = list(groups)
    names = sorted({n for g in groups.values() for n in g})
    values = [v for g in groups.values() for v in g.values()]
    lo, hi = min(0.0, min(values)), max(0.0, max(values))
    pw, ph, margin = max(320, 90 * len(labels)), 240, 80
    frame = Frame(margin, margin, pw, ph, (0, len(labels)), (lo, hi))
    body = _axes(frame, title, "", ylabel)
    slot = pw / len(labels)
    bw = slot * 0.8 / max(len(names), 1)
    for gi, label in enumerate(labels):
        gx = frame.x0 + gi * slot + slot * 0.1
        for k, name in enumerate(names):
            if name not in groups[label]:
                continue
            v = groups[label][name]
            top, base = frame.y(max(v, 0.0)), frame.y(min(v, 0.0))
            body.append(f'<rect x="{gx + k * bw:.1f}" y="{top:.1f}" width="{bw:.1f}" '
                        f'height="{base - top:.1f}" fill="{PALETTE[k % len(PALETTE)]}"/>')
        body.append(f'<text x="{gx + slot * 0.4:.1f}" y="{frame.y0 + ph + 14}" '
                    f'text-anchor="middle" font-size="10">{escape(str(label))}</text>')
    for k, name in enumerate(names):
        y = margin + ph + 50
        x = margin + k * 120
        body.append(f'<rect x="{x}" y="{y - 9}" width="12" height="10" '
                    f'fill="{PALETTE[k % len(PALETTE)]}"/>')
        body.append(f'<text x="{x + 16}" y="{y}" font-size="11">{escape(str(name))}</text>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_document(pw + 2 * margin, ph + 2 * margin + 20, body))
