"""Miscellaneous utility functions."""
from __future__ import annotations

from p_tqdm import p_map
from tqdm import tqdm


def fan_out(fn, items, threads=1, desc=None):
    """Map ``fn`` over independent runs, in worker processes when ``threads`` > 1.

    Args:
        fn (Callable):
            run function; must not share state between calls
        items (list):
            one argument per run
        threads (int):
            worker processes
        desc (str | None):
            progress bar label

    Returns:
        list: results in input order
    """
    items = list(items)
    if threads > 1 and len(items) > 1:
        return p_map(fn, items, num_cpus=min(threads, len(items)), desc=desc)
    return [fn(item) for item in tqdm(items, desc=desc, disable=len(items) < 2)]
