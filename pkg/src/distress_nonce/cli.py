"""Command-line driver: key setup, enrolment, distress, scenarios and statistics.

Exit codes: 0 success, 2 configuration error, 3 protocol rejection,
4 parameter validation failure, 5 missing or corrupt store. Failures print
one JSON error record on stderr.
"""
from __future__ import annotations

import csv
import functools
import io
import json
import sys
from pathlib import Path
from typing import Optional

import click
import jsonschema

from . import crypto, profiles, schemas
from .errors import (EnrolmentRejected, LayoutViolation, ParameterError, ProtocolReject,
                     ScriptError, StoreCorrupt)
from .harness import game, stats
from .harness.flows import Deployment
from .harness.scenario import scenario_run
from .protocol import store as st
from .protocol.parties import DCP_IDENTITY, Dcp
from .protocol.records import EventLog
from .rng import Prg

EXIT_CONFIG, EXIT_PROTOCOL, EXIT_PARAMS, EXIT_STORE = 2, 3, 4, 5
DEFAULT_SWEEP = (1, 2, 4, 8, 16)


class ConfigError(Exception):
    pass


def _fail(kind: str, code: int, message: str, reason: Optional[str] = None):
    record = {"error": message, "kind": kind, "exit_code": code, "reason": reason}
    schemas.validate("error", record)
    click.echo(json.dumps(record, sort_keys=True), err=True)
    sys.exit(code)


def guarded(fn):
    """Map library exceptions onto exit codes and error records."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, ScriptError) as exc:
            _fail("config", EXIT_CONFIG, str(exc))
        except jsonschema.ValidationError as exc:
            _fail("config", EXIT_CONFIG, exc.message)
        except (EnrolmentRejected, ProtocolReject) as exc:
            _fail("protocol", EXIT_PROTOCOL, str(exc), exc.reason)
        except (ParameterError, LayoutViolation) as exc:
            _fail("params", EXIT_PARAMS, str(exc))
        except StoreCorrupt as exc:
            _fail("store", EXIT_STORE, str(exc))
    return wrapper


# -- configuration ------------------------------------------------------------

def _settings(ctx: click.Context, **flags) -> dict:
    """Config-file values overlaid with every flag that was actually given."""
    cfg = {}
    path = ctx.obj.get("config")
    if path:
        try:
            cfg = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        schemas.validate("config", cfg)
    cfg.update({k: v for k, v in flags.items() if v is not None})
    return cfg


def _seed(cfg: dict, required: bool):
    seed = cfg.get("seed")
    if seed is None and required:
        raise ConfigError("this command needs --seed")
    return seed


def _rng(cfg: dict, *labels, required: bool = False) -> Prg:
    seed = _seed(cfg, required)
    base = Prg.from_os() if seed is None else Prg(seed)
    return base.spawn(*labels)


def _profile(cfg: dict, default: str):
    profile = profiles.load(cfg.get("profile", default))
    widths = [cfg.get(k) for k in ("m_d", "m_i", "m_t")]
    if any(w is not None for w in widths):
        lay = profile.layout
        m_d, m_i, m_t = (w if w is not None else cur
                         for w, cur in zip(widths, (lay.m_d, lay.m_i, lay.m_t)))
        if m_d + m_i + m_t + lay.pad_bits != profile.curve.bit_len:
            raise ConfigError(f"layout override {m_d}+{m_i}+{m_t}+{lay.pad_bits} does not "
                              f"fill {profile.curve.bit_len} bits")
        profile = profile.with_layout(m_d, m_i, m_t)
    return profile


def _parse_sweep(text) -> Optional[list[int]]:
    if text is None:
        return None
    try:
        sweep = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --n-sweep {text!r}") from exc
    if not sweep or min(sweep) < 1:
        raise ConfigError("--n-sweep needs positive integers")
    return sweep


def _emit(record: dict, out: Optional[str] = None) -> None:
    schemas.validate("result", record)
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    click.echo(text, nl=False)


# -- store directory ------------------------------------------------------------

class Store:
    """deployment.json, dcp.json, servers/*.json, users/*.json, events.ndjson."""

    def __init__(self, root):
        if root is None:
            raise ConfigError("this command needs --store")
        self.root = Path(root)

    @property
    def deployment_file(self) -> Path:
        return self.root / "deployment.json"

    def exists(self) -> bool:
        return self.deployment_file.exists()

    def create(self, profile, n_max: int, rng: Prg) -> None:
        if self.exists():
            raise ConfigError(f"{self.root} already holds a deployment")
        dep = Deployment(profile, rng, n_max=n_max)
        curve = profile.curve
        (self.root / "servers").mkdir(parents=True, exist_ok=True)
        (self.root / "users").mkdir(exist_ok=True)
        doc = {
            "version": st.FORMAT_VERSION, "profile": profiles.to_dict(profile), "n_max": n_max,
            "root": st.signing_key_to_dict(curve, dep.root),
            "dcp_key": st.signing_key_to_dict(curve, dep.dcp.signing_key),
            "dcp_cert": dep.dcp.cert.to_dict(curve),
        }
        st.save_dcp(dep.dcp, self.root / "dcp.json")
        self.deployment_file.write_text(st.dumps(doc))

    def open(self, rng: Prg) -> Deployment:
        if not self.exists():
            raise StoreCorrupt(f"no deployment in {self.root}; run keygen first")
        try:
            doc = json.loads(self.deployment_file.read_text())
            profile = profiles.from_dict(doc["profile"])
            curve = profile.curve
            root = st.signing_key_from_dict(curve, doc["root"])
            key = st.signing_key_from_dict(curve, doc["dcp_key"])
            cert = crypto.Certificate.from_dict(curve, doc["dcp_cert"])
            n_max = int(doc["n_max"])
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise StoreCorrupt(f"{self.deployment_file}: {exc}") from exc
        events = EventLog(self.root / "events.ndjson")
        dcp = Dcp(profile, key, cert, root.vk, rng.spawn("dcp"), n_max, events)
        st.load_dcp(dcp, self.root / "dcp.json")
        dep = Deployment(profile, rng, n_max, root=root, dcp=dcp)
        for path in sorted((self.root / "servers").glob("*.json")):
            dep.attach_webserver(st.webserver_from_dict(
                profile, self._read(path), rng.spawn("server", path.stem)))
        for path in sorted((self.root / "users").glob("*.json")):
            dep.attach_user(st.user_from_dict(profile, self._read(path), rng.spawn("user", path.stem)))
        return dep

    @staticmethod
    def _read(path: Path) -> dict:
        try:
            return json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreCorrupt(f"{path}: {exc}") from exc

    @staticmethod
    def _name(name: str) -> str:
        if not name or "/" in name or name.startswith("."):
            raise ConfigError(f"unusable principal name {name!r}")
        return name

    def save(self, dep: Deployment) -> None:
        for name, srv in dep.servers.items():
            (self.root / "servers" / f"{self._name(name)}.json").write_text(
                st.dumps(st.webserver_to_dict(srv)))
        for name, user in dep.users.items():
            (self.root / "users" / f"{self._name(name)}.json").write_text(
                st.dumps(st.user_to_dict(user)))
        st.save_dcp(dep.dcp, self.root / "dcp.json")


# -- commands -------------------------------------------------------------------

profile_opt = click.option("--profile", help="toy, production, or a parameter file path.")
seed_opt = click.option("--seed", help="Seed for every random choice.")
store_opt = click.option("--store", type=click.Path(file_okay=False),
                         help="Deployment state directory.")
out_opt = click.option("--out", type=click.Path(), help="Output file (or directory).")
trials_opt = click.option("--trials", type=int, help="Monte-Carlo trials.")
layout_opts = [click.option("--m-d", "m_d", type=int), click.option("--m-i", "m_i", type=int),
               click.option("--m-t", "m_t", type=int)]


def with_layout(fn):
    for opt in reversed(layout_opts):
        fn = opt(fn)
    return fn


@click.group()
@click.option("--config", type=click.Path(dir_okay=False), help="JSON configuration file.")
@click.pass_context
def main(ctx, config):
    """Covert distress signals in TLS client nonces."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = config


@main.command()
@profile_opt
@seed_opt
@store_opt
@click.option("--n-max", "n_max", type=int, help="Sequence-number window.")
@with_layout
@click.pass_context
@guarded
def keygen(ctx, **flags):
    """Create the root CA and DCP keys in a fresh store."""
    cfg = _settings(ctx, **flags)
    profile = _profile(cfg, "toy")
    _check_profile(profile)
    s = Store(cfg.get("store"))
    s.create(profile, int(cfg.get("n_max", 8)), _rng(cfg, "keygen"))
    _emit({"command": "keygen", "ok": True, "store": str(s.root), "profile": profile.name})


@main.command("enroll-server")
@click.argument("name")
@seed_opt
@store_opt
@click.pass_context
@guarded
def enroll_server(ctx, name, **flags):
    """Register webserver NAME with the DCP."""
    cfg = _settings(ctx, **flags)
    s = Store(cfg.get("store"))
    dep = s.open(_rng(cfg, "enroll-server", name))
    if name == DCP_IDENTITY:
        raise ConfigError(f"{name!r} is reserved")
    try:
        srv = dep.add_webserver(name)
    finally:
        s.save(dep)
    _emit({"command": "enroll-server", "ok": True, "server": name,
           "enc_pk": crypto.point_to_bytes(dep.curve, srv.enc_keys.pk).hex()})


@main.command("enroll-user")
@click.argument("usr")
@click.option("--password", required=True)
@click.option("--site", "sites", multiple=True, required=True, help="Website to select.")
@click.option("--info", default="")
@click.option("--instruction", default=None, help="Page element that hides s_AC.")
@seed_opt
@store_opt
@click.pass_context
@guarded
def enroll_user(ctx, usr, password, sites, info, instruction, **flags):
    """Enrol user USR for the chosen websites."""
    cfg = _settings(ctx, **flags)
    s = Store(cfg.get("store"))
    dep = s.open(_rng(cfg, "enroll-user", usr))
    if usr in dep.users:
        dep.users[usr].pwd = password  # re-enrolment: the DCP checks it
    dep.add_user(usr, password, sites, info, instruction)
    s.save(dep)
    creds = dep.users[usr].creds
    _emit({"command": "enroll-user", "ok": True, "usr": usr, "id": creds.id,
           "sites": sorted(creds.websites_with_keys)})


@main.command("send-distress")
@click.argument("usr")
@click.argument("site")
@seed_opt
@store_opt
@click.pass_context
@guarded
def send_distress(ctx, usr, site, **flags):
    """Send one distress ClientHello from USR to SITE and report the verdict."""
    cfg = _settings(ctx, **flags)
    s = Store(cfg.get("store"))
    dep = s.open(_rng(cfg, "send-distress", usr, site))
    if usr not in dep.users:
        raise ConfigError(f"unknown user {usr!r}")
    if site not in dep.servers:
        raise ConfigError(f"unknown server {site!r}")
    before = len(dep.dcp.events)
    try:
        out = dep.distress(usr, site)
    finally:
        s.save(dep)
    if not out.accepted or out.page is None:
        raise ProtocolReject(out.reason or "NotForwarded")
    event = dep.dcp.events.events[before]
    _emit({"command": "send-distress", "ok": True, "accepted": True,
           "confirmed": bool(out.confirmed), "event": json.loads(event.to_json())})


@main.command()
@click.argument("script", type=click.Path(dir_okay=False))
@profile_opt
@seed_opt
@out_opt
@click.pass_context
@guarded
def simulate(ctx, script, **flags):
    """Run a scenario SCRIPT; write events, tapped frames and outcomes to --out."""
    cfg = _settings(ctx, **flags)
    try:
        doc = json.loads(Path(script).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read script {script}: {exc}") from exc
    if cfg.get("seed") is None and "seed" not in doc:
        raise ConfigError("this command needs --seed")
    seed = cfg.get("seed", doc.get("seed"))
    profile = _profile(cfg, doc.get("profile", "production"))
    result = scenario_run(doc, seed, profile)
    for e in result.events:
        schemas.validate("event", json.loads(e.to_json()))
    for f in result.frames:
        schemas.validate("frame", json.loads(f.to_json()))
    summary = {"command": "simulate", "ok": True, "events": len(result.events),
               "frames": len(result.frames), "outcomes": result.outcomes}
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "events.ndjson").write_text(result.events_ndjson())
        (out / "frames.ndjson").write_text(result.frames_ndjson())
        _emit(summary, str(out / "summary.json"))
    else:
        _emit(summary)


def game_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["n", "trials", "advantage", "std_err", "analytic"],
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        schemas.validate("game_row", row)
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


@main.command("game")
@profile_opt
@seed_opt
@trials_opt
@click.option("--n-sweep", "n_sweep", help="Comma-separated distribution sizes.")
@click.option("--workers", type=int, help="Worker processes for the trials.")
@out_opt
@click.pass_context
@guarded
def game_cmd(ctx, n_sweep, **flags):
    """Estimate the distinguisher's advantage over an n sweep; CSV output."""
    cfg = _settings(ctx, n_sweep=_parse_sweep(n_sweep), **flags)
    seed = _seed(cfg, required=True)
    profile = _profile(cfg, "production")
    trials = int(cfg.get("trials", 100_000))
    if trials < game.MIN_TRIALS:
        raise ConfigError(f"--trials must be at least {game.MIN_TRIALS}")
    rows = []
    for n in cfg.get("n_sweep", DEFAULT_SWEEP):
        est = game.estimate_advantage(profile, n, trials, Prg(seed).spawn("game"),
                                      workers=int(cfg.get("workers", 1)))
        rows.append({"n": n, "trials": est.trials, "advantage": est.advantage,
                     "std_err": est.std_err, "analytic": game.analytic_advantage(n)})
    text = game_csv(rows)
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    click.echo(text, nl=False)


@main.command("fp-rate")
@profile_opt
@seed_opt
@trials_opt
@with_layout
@out_opt
@click.pass_context
@guarded
def fp_rate(ctx, **flags):
    """Measure how often PRG nonces decode as distress."""
    cfg = _settings(ctx, **flags)
    seed = _seed(cfg, required=True)
    profile = _profile(cfg, "toy")
    trials = int(cfg.get("trials", 1_000_000))
    if trials < 1:
        raise ConfigError("--trials must be positive")
    est = stats.measure_false_positive_rate(profile.codec, trials, Prg(seed).spawn("fp-rate"),
                                            z=3.0)
    exact = None
    if profile.curve.q <= stats.EXHAUSTIVE_LIMIT:
        exact = stats.exact_false_positive_rate(profile.curve, profile.layout)
    record = {"profile": profile.name, "m_d": profile.layout.m_d, "trials": est.trials,
              "hits": est.hits, "rate": est.rate, "wilson_low": est.low,
              "wilson_high": est.high, "model": stats.model_false_positive_rate(profile.layout),
              "exact": exact}
    schemas.validate("fp_rate", record)
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    click.echo(text, nl=False)


def _check_profile(profile) -> list[str]:
    problems = profile.problems()
    if problems:
        raise ParameterError("; ".join(problems))
    return problems


@main.command("validate-params")
@profile_opt
@with_layout
@click.pass_context
@guarded
def validate_params(ctx, **flags):
    """Check curve and layout constraints; exit 4 if any is violated."""
    cfg = _settings(ctx, **flags)
    profile = _profile(cfg, "toy")
    problems = profile.problems()
    report = {"profile": profile.name, "ok": not problems, "problems": problems,
              "bit_len": profile.curve.bit_len, "wire_bits": profile.codec.wire_bits}
    schemas.validate("params_report", report)
    click.echo(json.dumps(report, sort_keys=True, indent=2))
    if problems:
        _fail("params", EXIT_PARAMS, "; ".join(problems))


if __name__ == "__main__":
    main()
