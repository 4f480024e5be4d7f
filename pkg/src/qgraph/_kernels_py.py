"""Pure-Python closed-walk enumeration; reference twin of ``_kernels.pyx``.

Both implementations must return bit-identical arrays for identical input.
"""
import numpy as np


class BudgetExceeded(RuntimeError):
    pass


def _is_min_rotation(seq, n):
    for r in range(1, n):
        for i in range(n):
            a = seq[i]
            b = seq[(i + r) % n]
            if a != b:
                if b < a:
                    return False
                break
    return True


def _repetition(seq, n):
    for p in range(1, n + 1):
        if n % p:
            continue
        if all(seq[i] == seq[i - p] for i in range(p, n)):
            return n // p
    return 1


def closed_walks(succ_ptr, succ_idx, fac, bond_len, lmax, skip_zero, max_count):
    """Enumerate closed bond walks with total length ``<= lmax``, one per cyclic class.

    Each class is emitted as its lexicographically minimal rotation. A DFS
    from start bond ``s`` only visits bonds ``>= s``; a walk closes when
    ``s`` is a successor of the last bond.

    Returns ``(flat, offsets, lengths, scattering, repetition)``.
    """
    nb = bond_len.shape[0]
    succ_ptr = [int(x) for x in succ_ptr]
    succ_idx = [int(x) for x in succ_idx]
    blen = [float(x) for x in bond_len]
    fac_rows = [[float(x) for x in row] for row in fac]
    slack = 1e-12 * max(1.0, lmax)
    flat, offsets, lengths, scat, reps = [], [0], [], [], []
    for s in range(nb):
        if blen[s] > lmax + slack:
            continue
        path = [s]
        lens = [blen[s]]
        prods = [1.0]
        iters = [succ_ptr[s]]
        while path:
            depth = len(path) - 1
            top = path[depth]
            pos = iters[depth]
            if pos == succ_ptr[top]:
                # first visit of this node: try to close the walk
                close = fac_rows[top][s]
                if close == close and not (skip_zero and close == 0.0):
                    n = depth + 1
                    if _is_min_rotation(path, n):
                        if len(lengths) >= max_count:
                            raise BudgetExceeded(max_count)
                        flat.extend(path)
                        offsets.append(len(flat))
                        lengths.append(lens[depth])
                        scat.append(prods[depth] * close)
                        reps.append(_repetition(path, n))
            if pos == succ_ptr[top + 1]:
                path.pop()
                lens.pop()
                prods.pop()
                iters.pop()
                continue
            iters[depth] = pos + 1
            nxt = succ_idx[pos]
            if nxt < s:
                continue
            f = fac_rows[top][nxt]
            if skip_zero and f == 0.0:
                continue
            nl = lens[depth] + blen[nxt]
            if nl > lmax + slack:
                continue
            path.append(nxt)
            lens.append(nl)
            prods.append(prods[depth] * f)
            iters.append(succ_ptr[nxt])
    return (
        np.asarray(flat, dtype=np.int64),
        np.asarray(offsets, dtype=np.int64),
        np.asarray(lengths, dtype=np.float64),
        np.asarray(scat, dtype=np.float64),
        np.asarray(reps, dtype=np.int64),
    )
