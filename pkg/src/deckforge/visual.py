"""Slide rendering through an external command, SSIM, and SSIM-based screening."""

from __future__ import annotations

import re
import shlex
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .deck import parse_deck
from .errors import (
    DimensionMismatchError,
    RenderCountMismatchError,
    RendererMissingError,
    RendererTimeoutError,
    RenderFailedError,
)
from .package import open_package

DEFAULT_THRESHOLD = 0.995
BUILTIN = "builtin"
WIREFRAME_COMMAND = [sys.executable, "-m", "deckforge.wireframe", "{input}", "{outdir}"]


@dataclass
class RenderConfig:
    """How to turn a deck into slide images.

    ``command`` is either a shell-style string or an argv list; ``{input}``
    and ``{outdir}`` are substituted.  The special value ``"builtin"`` runs
    the wireframe renderer in-process, which skips interpreter start-up.  Whatever the renderer names its files,
    those matching ``image_glob`` are sorted by the numbers in their names and
    renamed to ``slide-001.png`` and so on.
    """

    command: list[str] | str = field(default_factory=lambda: list(WIREFRAME_COMMAND))
    image_glob: str = "*.png"
    timeout_s: float = 120.0
    long_edge: int | None = None  # resize outputs so the long side has this many pixels

    def argv(self, input_path, outdir) -> list[str]:
        tokens = shlex.split(self.command) if isinstance(self.command, str) else list(self.command)
        return [t.replace("{input}", str(input_path)).replace("{outdir}", str(outdir)) for t in tokens]

    @classmethod
    def from_dict(cls, data: dict | None) -> "RenderConfig":
        data = dict(data or {})
        known = {k: data[k] for k in ("command", "image_glob", "timeout_s", "long_edge") if k in data}
        return cls(**known)


@dataclass(frozen=True)
class SsimParams:
    window: str = "uniform"  # "uniform" (8x8) or "gaussian" (11-tap, sigma 1.5)
    size: int = 8
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 255.0
    rescale: bool = True  # resize b to a's dimensions when they differ


def _natural_key(path: Path):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", path.name)]


def render_deck(path, cfg: RenderConfig | None = None, outdir=None) -> list[Path]:
    """Render ``path`` and return ``slide-NNN.png`` paths in slide order."""
    cfg = cfg or RenderConfig()
    path = Path(path)
    expected = len(parse_deck(open_package(path)).slides)
    outdir = Path(outdir) if outdir is not None else Path(tempfile.mkdtemp(prefix="deckforge-render-"))
    outdir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(prefix="deckforge-raw-") as raw:
        if cfg.command == BUILTIN:
            from .wireframe import render_to_dir

            render_to_dir(path, raw)
        else:
            _run_external(cfg, path, raw)
        found = sorted(Path(raw).rglob(cfg.image_glob), key=_natural_key)
        if len(found) != expected:
            raise RenderCountMismatchError(f"renderer produced {len(found)} images for {expected} slides",
                                           expected=expected, actual=len(found))
        for old in outdir.glob("slide-*.png"):
            old.unlink()
        out = []
        for i, src in enumerate(found, start=1):
            dest = outdir / f"slide-{i:03d}.png"
            with Image.open(src) as im:
                im = im.convert("RGB")
                if cfg.long_edge and max(im.size) != cfg.long_edge:
                    k = cfg.long_edge / max(im.size)
                    im = im.resize((max(1, round(im.width * k)), max(1, round(im.height * k))), Image.LANCZOS)
                im.save(dest, format="PNG")
            out.append(dest)
    return out


def _run_external(cfg: RenderConfig, path: Path, raw):
    argv = cfg.argv(path.resolve(), raw)
    if not argv or shutil.which(argv[0]) is None:
        exe = argv[0] if argv else "(empty command)"
        raise RendererMissingError(f"renderer executable {exe!r} not found; install it or set "
                                   f"render.command in the config", command=argv)
    try:
        proc = subprocess.run(argv, capture_output=True, timeout=cfg.timeout_s)
    except subprocess.TimeoutExpired:
        raise RendererTimeoutError(f"renderer exceeded {cfg.timeout_s}s on {path.name}") from None
    if proc.returncode != 0:
        tail = proc.stderr.decode("utf-8", "replace").strip()[-500:]
        raise RenderFailedError(f"renderer exited with status {proc.returncode}: {tail}")


# -- SSIM -----------------------------------------------------------------

def to_gray(image) -> np.ndarray:
    """BT.601 luma as float64; accepts a path, PIL image or array."""
    if isinstance(image, (str, Path)):
        with Image.open(image) as im:
            return to_gray(im.convert("RGB"))
    if isinstance(image, Image.Image):
        image = np.asarray(image.convert("RGB"))
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] >= 3:
        return 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]
    raise ValueError(f"unsupported image shape {arr.shape}")


def _resize_gray(arr: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    im = Image.fromarray(arr.astype(np.float32))
    return np.asarray(im.resize((shape[1], shape[0]), Image.BILINEAR), dtype=np.float64)


def _box_mean(x: np.ndarray, n: int) -> np.ndarray:
    """Mean over every n-by-n window (valid positions only), via an integral image."""
    s = np.pad(x, ((1, 0), (1, 0))).cumsum(0).cumsum(1)
    return (s[n:, n:] - s[:-n, n:] - s[n:, :-n] + s[:-n, :-n]) / (n * n)


def _gauss_mean(x: np.ndarray, taps: int = 11, sigma: float = 1.5) -> np.ndarray:
    k = np.exp(-0.5 * ((np.arange(taps) - (taps - 1) / 2) / sigma) ** 2)
    k /= k.sum()
    x = np.apply_along_axis(lambda r: np.convolve(r, k, mode="valid"), 1, x)
    return np.apply_along_axis(lambda c: np.convolve(c, k, mode="valid"), 0, x)


def ssim_raw(a, b, p: SsimParams = SsimParams()) -> float:
    """Mean local SSIM in [-1, 1] using population (biased) window statistics."""
    x, y = to_gray(a), to_gray(b)
    if x.shape != y.shape:
        if not p.rescale:
            raise DimensionMismatchError(f"image sizes differ: {x.shape[::-1]} vs {y.shape[::-1]}")
        y = _resize_gray(y, x.shape)
    if p.window == "gaussian":
        mean, n = _gauss_mean, 11
    else:
        n = p.size
        mean = lambda z: _box_mean(z, n)  # noqa: E731
    if min(x.shape) < n:  # tiny images: a single window over everything
        mean = lambda z: np.array([[z.mean()]])  # noqa: E731
    c1, c2 = (p.k1 * p.data_range) ** 2, (p.k2 * p.data_range) ** 2
    mx, my = mean(x), mean(y)
    vx = mean(x * x) - mx * mx
    vy = mean(y * y) - my * my
    cov = mean(x * y) - mx * my
    num = (2 * mx * my + c1) * (2 * cov + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def ssim(a, b, p: SsimParams = SsimParams()) -> float:
    """SSIM clamped to [0, 1]."""
    return min(1.0, max(0.0, ssim_raw(a, b, p)))


@dataclass
class ScreeningResult:
    kept: list[int]  # 0-based slide indices
    scores: list[float | None]
    count_mismatch: bool
    threshold: float

    def to_dict(self) -> dict:
        return {"kept": self.kept, "scores": self.scores, "count_mismatch": self.count_mismatch,
                "threshold": self.threshold}


def screen(pred_images, gt_images, threshold: float = DEFAULT_THRESHOLD,
           p: SsimParams = SsimParams()) -> ScreeningResult:
    pred_images, gt_images = list(pred_images), list(gt_images)
    if len(pred_images) != len(gt_images):
        n = max(len(pred_images), len(gt_images))
        return ScreeningResult(list(range(n)), [None] * n, True, threshold)
    scores = [ssim(a, b, p) for a, b in zip(pred_images, gt_images)]
    kept = [i for i, s in enumerate(scores) if s < threshold]
    return ScreeningResult(kept, scores, False, threshold)


def screen_changed_slides(pred_images, gt_images, threshold: float = DEFAULT_THRESHOLD,
                          p: SsimParams = SsimParams()) -> list[int]:
    """0-based indices whose SSIM falls below ``threshold``; all indices on a count mismatch."""
    return screen(pred_images, gt_images, threshold, p).kept
