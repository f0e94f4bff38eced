"""Data usage analysis: locate data-of-interest call sites and trace them.

A DOI site is an invoke statement matching a personal-information API rule
(class + method) or a keyword rule (method name = verb+keyword).  From each
site the analysis builds a FlowTrace: a backward pass resolves where the
value could have come from (parameter bindings at call sites, constants,
copies), and a forward pass follows every use of the value through copies,
into callees via argument/parameter bindings, and back out through returns
into the call site's assigned variable.

The trace's df set is the least fixed point of the backward/intra/forward
steps; visited sets make it terminate on recursive call graphs, and return
bindings are trace-global so the result does not depend on traversal order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ir
from .callgraph import CallGraph, callers_of
from .ir import (
    AssignConst,
    AssignCopy,
    AssignInvoke,
    AssignParam,
    Invoke,
    IrProgram,
    IrStmt,
    MethodSig,
    Return,
    Var,
)
from .lexicons import iter_tsv, read_text

__all__ = [
    "DoiSite",
    "FlowTrace",
    "KeywordRule",
    "PiApiRule",
    "PiType",
    "TRACKED_PI",
    "TraceEntry",
    "analyze_data_usage",
    "backward_analysis",
    "find_doi",
    "intra_method_var_analysis",
    "load_pi_rules",
    "normalize_pi",
    "smi_of",
]

# The closed set of tracked data types.
TRACKED_PI = (
    "Ad ID",
    "username",
    "password",
    "name",
    "location",
    "contact",
    "phone number",
    "email address",
    "IMEI",
    "Wi-Fi",
    "MAC address",
    "GSF ID",
    "Android ID",
    "serial number",
    "SIM serial number",
)

_ID_BY_LOWER = {pi.lower(): pi for pi in TRACKED_PI}

# Rule-file labels that name a tracked type under a different spelling.
_PI_LABEL_ALIASES = {
    "sim number": "SIM serial number",
    "sim serial": "SIM serial number",
    "imsi": "serial number",
    "imse": "serial number",
    "ad id": "Ad ID",
    "advertising id": "Ad ID",
    "ssid": "Wi-Fi",
    "user name": "username",
    "user credential": "username",
    "bluetooth address": "MAC address",
    "cell location": "location",
    "gps location": "location",
    "timezone": "location",
    "time zone": "location",
}


@dataclass(frozen=True)
class PiType:
    """A tracked data type: closed-set id plus the label it was loaded under."""

    id: str
    display: str = ""

    def __post_init__(self):
        if self.id not in TRACKED_PI:
            raise ValueError(f"unknown tracked data type {self.id!r}")
        if not self.display:
            object.__setattr__(self, "display", self.id)


def normalize_pi(label: str) -> PiType:
    low = label.strip().lower()
    pi_id = _ID_BY_LOWER.get(low) or _PI_LABEL_ALIASES.get(low)
    if pi_id is None:
        raise ValueError(f"unknown data type label {label!r}")
    return PiType(id=pi_id, display=label.strip())


@dataclass(frozen=True)
class PiApiRule:
    pi: PiType
    class_name: str
    method_name: str


_KEYWORD_VERBS = frozenset({"get", "request"})


@dataclass(frozen=True)
class KeywordRule:
    pi: PiType
    verb: str
    keyword: str

    def __post_init__(self):
        if self.verb not in _KEYWORD_VERBS:
            raise ValueError(f"keyword rule verb must be get/request, got {self.verb!r}")


def load_pi_rules(path=None) -> tuple[list[PiApiRule], list[KeywordRule]]:
    """Load PI rules from a TSV file (bundled pi_api_rules.tsv by default).

    Two line shapes: ``pi<TAB>class<TAB>method`` for API rules and
    ``pi<TAB>kw:<verb>+<keyword>`` for keyword rules.
    """
    text = read_text(path, "pi_api_rules.tsv")
    api_rules: list[PiApiRule] = []
    kw_rules: list[KeywordRule] = []
    seen_api: set[tuple[str, str]] = set()
    for lineno, cols in iter_tsv(text):
        if len(cols) == 2 and cols[1].startswith("kw:"):
            spec = cols[1][3:]
            verb, sep, keyword = spec.partition("+")
            if not sep or not verb or not keyword:
                raise ValueError(f"rules line {lineno}: bad keyword spec {cols[1]!r}")
            kw_rules.append(KeywordRule(normalize_pi(cols[0]), verb.lower(), keyword.lower()))
        elif len(cols) == 3:
            key = (cols[1], cols[2].lower())
            if key in seen_api:
                raise ValueError(f"rules line {lineno}: duplicate API rule {cols[1]}.{cols[2]}")
            seen_api.add(key)
            api_rules.append(PiApiRule(normalize_pi(cols[0]), cols[1], cols[2]))
        else:
            raise ValueError(f"rules line {lineno}: expected 2 or 3 columns, got {len(cols)}")
    api_rules.sort(key=lambda r: (r.pi.id, r.class_name, r.method_name))
    kw_rules.sort(key=lambda r: (r.pi.id, r.verb, r.keyword))
    return api_rules, kw_rules


# ---------------------------------------------------------------------------
# DOI sites and traces


def smi_of(method: MethodSig, stmt: IrStmt) -> str:
    """Canonical statement key: containing method, index, and statement text."""
    return f"{method}@{stmt.index}: {ir.render_op(stmt.op)}"


@dataclass(frozen=True)
class DoiSite:
    method: MethodSig
    stmt: int
    var: Optional[str]
    pi: PiType
    smi: str


@dataclass(frozen=True)
class TraceEntry:
    var: Optional[str]
    method: MethodSig
    stmt: int
    smi: str

    def key(self) -> tuple:
        return (self.var, self.method, self.stmt)


@dataclass(frozen=True)
class FlowTrace:
    root: DoiSite
    df: tuple[TraceEntry, ...]
    terminals: tuple[TraceEntry, ...]

    def df_keys(self) -> set[tuple]:
        return {e.key() for e in self.df}

    def smis(self) -> set[str]:
        return {e.smi for e in self.df} | {e.smi for e in self.terminals}


def _match_rules(callee: MethodSig, api_rules, kw_rules) -> Optional[PiType]:
    for rule in api_rules:
        if rule.method_name.lower() != callee.name.lower():
            continue
        if "." in rule.class_name:
            if rule.class_name == callee.clazz:
                return rule.pi
        elif callee.clazz.rsplit(".", 1)[-1] == rule.class_name:
            return rule.pi
    low = callee.name.lower()
    for rule in kw_rules:
        if low == rule.verb + rule.keyword:
            return rule.pi
    return None


def find_doi(program: IrProgram, api_rules, kw_rules) -> list[DoiSite]:
    """Every invoke statement matching a PI rule, in (class, method, index) order."""
    sites: list[DoiSite] = []
    for cls in sorted(program.classes, key=lambda c: c.name):
        for method in sorted(cls.methods, key=lambda m: str(m.sig)):
            for stmt in method.body:
                callee = stmt.callee()
                if callee is None:
                    continue
                pi = _match_rules(callee, api_rules, kw_rules)
                if pi is None:
                    continue
                var = stmt.op.dst if isinstance(stmt.op, AssignInvoke) else None
                sites.append(
                    DoiSite(
                        method=method.sig,
                        stmt=stmt.index,
                        var=var,
                        pi=pi,
                        smi=smi_of(method.sig, stmt),
                    )
                )
    return sites


# ---------------------------------------------------------------------------
# Algorithm: backward + intra + forward over a shared trace state


class _TraceState:
    def __init__(self, program: IrProgram, fcg: CallGraph):
        self.program = program
        self.fcg = fcg
        self.df: dict[tuple, TraceEntry] = {}
        self.terminals: dict[tuple, TraceEntry] = {}
        self._visited_b: set[tuple[MethodSig, int, str]] = set()
        self._visited_f: set[tuple[MethodSig, str]] = set()
        # callee -> [(caller, call site, assigned var)] recorded during forward descent
        self._ret_bindings: dict[MethodSig, list[tuple[MethodSig, int, str]]] = {}
        # callee -> returned vars of the trace that reached a return statement
        self._returns_hit: dict[MethodSig, dict[str, None]] = {}

    # -- bookkeeping

    def _entry(self, var: Optional[str], msig: MethodSig, index: int) -> TraceEntry:
        method = self.program.method_by_sig(msig)
        assert method is not None
        return TraceEntry(var, msig, index, smi_of(msig, method.body[index]))

    def add_df(self, var: Optional[str], msig: MethodSig, index: int) -> None:
        key = (var, msig, index)
        if key not in self.df:
            self.df[key] = self._entry(var, msig, index)

    def add_terminal(self, var: Optional[str], msig: MethodSig, index: int) -> None:
        key = (var, msig, index)
        if key not in self.terminals:
            self.terminals[key] = self._entry(var, msig, index)

    # -- backward step (reaching definitions, then callers)

    def backward(self, msig: MethodSig, at: int, var: str) -> None:
        if (msig, at, var) in self._visited_b:
            return
        self._visited_b.add((msig, at, var))
        method = self.program.method_by_sig(msig)
        if method is None:
            return
        try:
            defs = ir.defs_of_at(method, at, var)
        except ir.UnknownVariable:
            return
        for d in sorted(defs):
            op = method.body[d].op
            if isinstance(op, AssignParam):
                callers = callers_of(self.fcg, msig)
                if not callers:
                    self.add_terminal(var, msig, d)
                    continue
                for caller, site in callers:
                    caller_m = self.program.method_by_sig(caller)
                    call_op = caller_m.body[site].op
                    if op.index >= len(call_op.args):
                        continue
                    arg = call_op.args[op.index]
                    if isinstance(arg, Var):
                        self.backward(caller, site, arg.name)
                    else:
                        self.add_terminal(var, caller, site)
            elif isinstance(op, AssignConst):
                self.add_terminal(var, msig, d)
            elif isinstance(op, AssignCopy):
                self.backward(msig, d, op.src)
            elif isinstance(op, AssignInvoke):
                # value originates in a callee's return: origin point, no descent
                self.add_df(var, msig, d)

    # -- forward step (all uses, descend through calls, surface via returns)

    def forward(self, msig: MethodSig, var: str) -> None:
        if (msig, var) in self._visited_f:
            return
        self._visited_f.add((msig, var))
        method = self.program.method_by_sig(msig)
        if method is None:
            return
        try:
            uses = ir.uses_of(method, var)
        except ir.UnknownVariable:
            return
        for u in uses:
            self.add_df(var, msig, u)
            op = method.body[u].op
            if isinstance(op, (AssignInvoke, Invoke)):
                callee = self.program.method_by_sig(op.sig)
                if callee is None or callee.is_abstract:
                    continue  # external or bodiless sink: leaf entry only
                if isinstance(op, AssignInvoke):
                    self._bind_return(op.sig, (msig, u, op.dst))
                for j, arg in enumerate(op.args):
                    if isinstance(arg, Var) and arg.name == var:
                        for stmt in callee.body:
                            if isinstance(stmt.op, AssignParam) and stmt.op.index == j:
                                self.forward(op.sig, stmt.op.var)
            elif isinstance(op, AssignCopy) and op.src == var:
                self.forward(msig, op.dst)
            elif isinstance(op, Return) and op.var == var:
                self._hit_return(msig, var)

    def _bind_return(self, callee: MethodSig, binding: tuple[MethodSig, int, str]) -> None:
        bindings = self._ret_bindings.setdefault(callee, [])
        if binding in bindings:
            return
        bindings.append(binding)
        # a return already reached in this callee must flow through the new binding
        if self._returns_hit.get(callee):
            caller, _site, dst = binding
            self.forward(caller, dst)

    def _hit_return(self, msig: MethodSig, var: str) -> None:
        hits = self._returns_hit.setdefault(msig, {})
        if var in hits:
            return
        hits[var] = None
        for caller, _site, dst in list(self._ret_bindings.get(msig, [])):
            self.forward(caller, dst)


def analyze_data_usage(program: IrProgram, fcg: CallGraph, doi: DoiSite) -> FlowTrace:
    """Build the FlowTrace rooted at ``doi``; terminates on cyclic call graphs."""
    state = _TraceState(program, fcg)
    state.add_df(doi.var, doi.method, doi.stmt)
    if doi.var is not None:
        state.backward(doi.method, doi.stmt, doi.var)
        state.forward(doi.method, doi.var)
    return FlowTrace(
        root=doi,
        df=tuple(state.df.values()),
        terminals=tuple(state.terminals.values()),
    )


def backward_analysis(
    program: IrProgram, fcg: CallGraph, msig: MethodSig, at: int, var: str
) -> tuple[tuple[TraceEntry, ...], tuple[TraceEntry, ...]]:
    """Only the backward step from an arbitrary (method, stmt, var) triple.

    Returns the (df entries, terminal entries) it contributes.
    """
    state = _TraceState(program, fcg)
    state.backward(msig, at, var)
    return tuple(state.df.values()), tuple(state.terminals.values())


def intra_method_var_analysis(
    program: IrProgram, fcg: CallGraph, msig: MethodSig, var: str
) -> tuple[tuple[TraceEntry, ...], tuple[TraceEntry, ...]]:
    """Only the intra/forward step for ``var`` in ``msig``.

    Returns the (df entries, terminal entries) it contributes.
    """
    state = _TraceState(program, fcg)
    state.forward(msig, var)
    return tuple(state.df.values()), tuple(state.terminals.values())
