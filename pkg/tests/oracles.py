"""Independent brute-force reference implementations used as test oracles.

Everything here is written with plain Python loops straight from the metric
definitions, on purpose: these functions must not share code paths with the
package under test.
"""

import math


def _channels(img):
    """Image as nested lists [row][col][channel]."""
    h = len(img)
    w = len(img[0])
    out = []
    for r in range(h):
        row = []
        for c in range(w):
            px = img[r][c]
            try:
                row.append([float(v) for v in px])
            except TypeError:
                row.append([float(px)])
        out.append(row)
    return out


def naive_mse(x, y):
    xs, ys = _channels(x), _channels(y)
    total = 0.0
    count = 0
    for r in range(len(xs)):
        for c in range(len(xs[0])):
            for b in range(len(xs[0][0])):
                d = xs[r][c][b] - ys[r][c][b]
                total += d * d
                count += 1
    return total / count


def naive_rmse(x, y):
    return math.sqrt(naive_mse(x, y))


def naive_psnr(x, y, peak=255.0):
    err = naive_mse(x, y)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


def _window_q(xw, yw):
    n = len(xw)
    mx = sum(xw) / n
    my = sum(yw) / n
    vx = sum((v - mx) ** 2 for v in xw) / n
    vy = sum((v - my) ** 2 for v in yw) / n
    cxy = sum((a - mx) * (b - my) for a, b in zip(xw, yw)) / n
    if all(a == b for a, b in zip(xw, yw)):
        return 1.0
    var_term = vx + vy
    mean_term = mx * mx + my * my
    if var_term <= 0.0 or mean_term <= 0.0:
        return 0.0
    q = 4.0 * cxy * mx * my / (var_term * mean_term)
    return max(-1.0, min(1.0, q))


def naive_uiqi(x, y, window=8):
    xs, ys = _channels(x), _channels(y)
    h, w, bands = len(xs), len(xs[0]), len(xs[0][0])
    channel_scores = []
    for b in range(bands):
        scores = []
        for r in range(h - window + 1):
            for c in range(w - window + 1):
                xw = [xs[r + i][c + j][b] for i in range(window) for j in range(window)]
                yw = [ys[r + i][c + j][b] for i in range(window) for j in range(window)]
                scores.append(_window_q(xw, yw))
        channel_scores.append(sum(scores) / len(scores))
    return sum(channel_scores) / len(channel_scores)


def naive_sam(x, y, eps=1e-6):
    xs, ys = _channels(x), _channels(y)
    angles = []
    for r in range(len(xs)):
        for c in range(len(xs[0])):
            vx, vy = xs[r][c], ys[r][c]
            nx = math.sqrt(sum(v * v for v in vx))
            ny = math.sqrt(sum(v * v for v in vy))
            if nx < eps or ny < eps:
                continue
            dot = sum(a * b for a, b in zip(vx, vy))
            cosang = max(-1.0, min(1.0, dot / (nx * ny)))
            angles.append(math.acos(cosang))
    if not angles:
        return 0.0
    return sum(angles) / len(angles)


def naive_ergas(x, y, ratio=1.0, eps=1e-6):
    xs, ys = _channels(x), _channels(y)
    h, w, bands = len(xs), len(xs[0]), len(xs[0][0])
    terms = []
    for b in range(bands):
        flat_x = [xs[r][c][b] for r in range(h) for c in range(w)]
        flat_y = [ys[r][c][b] for r in range(h) for c in range(w)]
        mu = sum(flat_x) / len(flat_x)
        if mu < eps:
            continue
        mse_b = sum((a - v) ** 2 for a, v in zip(flat_x, flat_y)) / len(flat_x)
        terms.append(mse_b / (mu * mu))
    if not terms:
        raise ValueError("all bands degenerate")
    return 100.0 * ratio * math.sqrt(sum(terms) / len(terms))


# --- cue formulas -----------------------------------------------------------

def naive_ear(p1, p2, p3, p4, p5, p6):
    return (math.dist(p2, p6) + math.dist(p3, p5)) / (2.0 * math.dist(p1, p4))


def naive_pupil_circularity(p1, p2, p3, p4, p5, p6):
    pts = [p1, p2, p3, p4, p5, p6]
    perimeter = sum(math.dist(pts[i], pts[(i + 1) % 6]) for i in range(6))
    area = math.pi * (math.dist(p2, p5) / 2.0) ** 2
    return 4.0 * math.pi * area / perimeter**2


def naive_lar(l1, l3, l5, l7):
    return math.dist(l3, l7) / math.dist(l1, l5)
