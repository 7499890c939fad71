# Writes pair_expanded.svg straight from the layout formula
# (x = q + r/2, y = -r*sqrt(3)/2), without going through the C++ renderer.
import math
import pathlib

scale, margin, pr, nr = 40.0, 1.0, 0.28, 0.05
h = math.sqrt(3) / 2
bodies = {(0, 0): None, (0, 1): "SE"}
off = {"E": (1, 0), "W": (-1, 0), "NE": (0, 1), "SW": (0, -1), "NW": (-1, 1), "SE": (1, -1)}
qmin, qmax, rmin, rmax = 0, 0, 0, 1
floor = 0
xlo = qmin + rmin / 2 - margin
xhi = qmax + rmax / 2 + margin
ylo = -rmax * h - margin
yhi = -rmin * h + margin


def f(x):
    s = "%.2f" % x
    return "0.00" if s == "-0.00" else s


def place(q, r):
    return ((q + r / 2 - xlo) * scale, (-r * h - ylo) * scale)


W, H = (xhi - xlo) * scale, (yhi - ylo) * scale
out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{f(W)}" height="{f(H)}" viewBox="0 0 {f(W)} {f(H)}">',
       '<rect width="100%" height="100%" fill="white"/>']
for r in range(rmin, rmax + 1):
    for q in range(qmin, qmax + 1):
        x, y = place(q, r)
        out.append(f'<circle cx="{f(x)}" cy="{f(y)}" r="{f(nr * scale)}" fill="#bbbbbb"/>')
x0, y0 = place(qmin, floor)
x1, y1 = place(qmax, floor)
out.append(f'<line class="floor" x1="{f(x0)}" y1="{f(y0)}" x2="{f(x1)}" y2="{f(y1)}" '
           'stroke="#3366cc" stroke-width="2" stroke-dasharray="6,4"/>')
pts = [place(qmin, rmin), place(qmax, rmin), place(qmax, rmax), place(qmin, rmax)]
out.append('<polygon class="bbox" points="' + " ".join(f"{f(a)},{f(b)}" for a, b in pts) +
           '" fill="#cccccc" fill-opacity="0.3" stroke="#999999"/>')
for (q, r), d in sorted(bodies.items()):
    if not d:
        continue
    u = (q + off[d][0], r + off[d][1])
    x0, y0 = place(q, r)
    x1, y1 = place(*u)
    out.append(f'<line class="expansion" x1="{f(x0)}" y1="{f(y0)}" x2="{f(x1)}" y2="{f(y1)}" '
               f'stroke="#222222" stroke-width="{f(0.2 * scale)}" stroke-linecap="round"/>')
    if u not in bodies:
        out.append(f'<circle class="semi" cx="{f(x1)}" cy="{f(y1)}" r="{f(pr * scale)}" '
                   'fill="none" stroke="#222222" stroke-dasharray="3,3"/>')
for (q, r), d in sorted(bodies.items()):
    x, y = place(q, r)
    fill = "#d9534f" if d else "#333333"
    out.append(f'<circle class="particle" cx="{f(x)}" cy="{f(y)}" r="{f(pr * scale)}" fill="{fill}"/>')
out.append("</svg>")
pathlib.Path(__file__).with_name("pair_expanded.svg").write_text("\n".join(out) + "\n")
