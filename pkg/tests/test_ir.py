import random

import pytest

from tplcheck import ir
from tplcheck.ir import (
    AssignConst,
    AssignInvoke,
    DuplicateClass,
    MethodSig,
    ParseError,
    UnknownVariable,
    UnresolvedLabel,
    parse_program,
    parse_sig,
    render_program,
)

from fuzz import random_program_text, random_straightline_method
from oracles import reaching_defs_paths

SIM_SIG = "<android.telephony.TelephonyManager: java.lang.String getSimSerialNumber()>"


def method_of(text, name=None):
    program = parse_program(text)
    for m in program.methods():
        if name is None or m.name == name:
            return m
    raise AssertionError(f"method {name} not found")


def body_method(*stmts, params=""):
    joined = "\n    ".join(stmts)
    return method_of(
        f"class com.t.A {{\n  public void run({params}) {{\n    {joined}\n  }}\n}}"
    )


class TestParsing:
    def test_empty_input(self):
        assert parse_program("").classes == ()

    def test_sim_serial_sig_round_trips(self):
        text = (
            "class com.t.A {\n  public void run() {\n"
            f"    r = invoke {SIM_SIG}()\n  }}\n}}"
        )
        program = parse_program(text)
        (stmt,) = next(program.methods()).body
        assert isinstance(stmt.op, AssignInvoke)
        assert str(stmt.op.sig) == SIM_SIG

    def test_unresolved_label(self):
        with pytest.raises(UnresolvedLabel):
            body_method("goto L9")

    def test_duplicate_class(self):
        text = "class com.t.A {\n}\nclass com.t.A {\n}"
        with pytest.raises(DuplicateClass):
            parse_program(text)

    def test_duplicate_method_sig(self):
        text = (
            "class com.t.A {\n"
            "  public void f() {\n    return\n  }\n"
            "  private void f() {\n    return\n  }\n"
            "}"
        )
        with pytest.raises(ParseError):
            parse_program(text)

    def test_overload_is_not_duplicate(self):
        text = (
            "class com.t.A {\n"
            "  public void f() {\n    return\n  }\n"
            "  public void f(int) {\n    return\n  }\n"
            "}"
        )
        assert len(parse_program(text).classes[0].methods) == 2

    def test_duplicate_label(self):
        with pytest.raises(ParseError):
            body_method("L0: return", "L0: return")

    def test_param_index_out_of_range(self):
        with pytest.raises(ParseError):
            body_method("v = param 1", params="int")

    def test_param_index_in_range(self):
        m = body_method("v = param 0", "return v", params="int")
        assert m.body[0].op == ir.AssignParam("v", 0)

    def test_concrete_method_requires_body(self):
        with pytest.raises(ParseError):
            parse_program("class com.t.A {\n  public void f();\n}")

    def test_abstract_method_requires_no_body(self):
        with pytest.raises(ParseError):
            parse_program("class com.t.A {\n  public abstract void f() {\n    return\n  }\n}")

    def test_garbage_statement(self):
        with pytest.raises(ParseError) as exc_info:
            body_method("v = = 3")
        assert exc_info.value.line > 0

    def test_string_const_with_escapes(self):
        m = body_method('v = const "a\\"b"', "return")
        assert m.body[0].op == AssignConst("v", 'a"b')

    def test_negative_int_const(self):
        m = body_method("v = const -4", "return")
        assert m.body[0].op == AssignConst("v", -4)

    def test_comments_and_blank_lines_ignored(self):
        text = (
            "# header comment\n\nclass com.t.A {\n"
            "  # about run\n  public void run() {\n"
            "    v = const 1  # trailing\n    return v\n  }\n}\n"
        )
        assert len(next(parse_program(text).methods()).body) == 2

    def test_entry_directive(self):
        text = (
            "# entry <com.app.Main: void onCreate()>\n"
            "class com.app.Main {\n  public void onCreate() {\n    return\n  }\n}"
        )
        program = parse_program(text)
        assert program.declared_entries == (
            MethodSig("com.app.Main", "void", "onCreate", ()),
        )

    def test_undefined_use_warns_not_rejects(self):
        text = "class com.t.A {\n  public void run() {\n    return ghost\n  }\n}"
        program = parse_program(text)
        assert any("ghost" in w for w in program.warnings)

    def test_parse_sig(self):
        sig = parse_sig("<com.a.B: int f(int,java.lang.String)>")
        assert sig == MethodSig("com.a.B", "int", "f", ("int", "java.lang.String"))
        with pytest.raises(ParseError):
            parse_sig("<broken")


class TestRoundTrip:
    def test_fixed_program(self):
        text = (
            "# entry <com.app.M: void go()>\n"
            "class com.app.M {\n"
            "  public void go() {\n"
            "    v = const 1\n"
            "    L0: w = v\n"
            "    if w goto L0\n"
            f"    r = invoke {SIM_SIG}()\n"
            '    invoke <com.x.Y: void log(java.lang.String,int)>(r, 3)\n'
            "    return r\n"
            "  }\n"
            "  protected abstract int depth(int);\n"
            "}\n"
        )
        first = parse_program(text)
        second = parse_program(render_program(first))
        assert first == second

    def test_fuzzed_programs(self):
        rng = random.Random(0xC0FFEE)
        for _ in range(100):
            text = random_program_text(rng)
            first = parse_program(text)
            assert parse_program(render_program(first)) == first


class TestCfgQueries:
    def test_straightline_defs(self):
        m = body_method("v = const 1", "return v")
        assert ir.defs_of_at(m, 1, "v") == {0}

    def test_branch_merges_defs(self):
        m = body_method("v = const 1", "c = const 0", "if c goto L", "v = const 2", "L: return v")
        assert ir.defs_of_at(m, 4, "v") == {0, 3}

    def test_def_after_at_does_not_reach(self):
        m = body_method("a = const 1", "b = a", "v = const 9", "return v")
        assert ir.defs_of_at(m, 1, "v") == set()

    def test_redefinition_kills(self):
        m = body_method("v = const 1", "v = const 2", "return v")
        assert ir.defs_of_at(m, 2, "v") == {1}

    def test_loop_body_def_reaches_exit(self):
        m = body_method(
            "v = const 0",
            "L0: c = const 1",
            "v = const 2",
            "if c goto L0",
            "return v",
        )
        assert ir.defs_of_at(m, 4, "v") == {2}
        assert ir.defs_of_at(m, 2, "v") == {0, 2}

    def test_unknown_variable(self):
        m = body_method("v = const 1", "return v")
        with pytest.raises(UnknownVariable):
            ir.defs_of_at(m, 1, "zzz")
        with pytest.raises(UnknownVariable):
            ir.uses_of(m, "zzz_also")

    def test_at_out_of_range(self):
        m = body_method("return")
        with pytest.raises(IndexError):
            ir.defs_of_at(m, 5, "v")

    def test_uses_copy_source(self):
        m = body_method("v = const 1", "w = v", "return w")
        assert ir.uses_of(m, "v") == [1]

    def test_uses_arg_and_cond(self):
        m = body_method(
            "v = const 1",
            "invoke <com.a.A: void f(int)>(v)",
            "if v goto L0",
            "L0: return",
        )
        assert ir.uses_of(m, "v") == [1, 2]

    def test_defs_straightline_singleton_or_empty(self):
        rng = random.Random(7)
        for _ in range(40):
            m = method_of(random_straightline_method(rng, max_stmts=12))
            if any(s.target is not None for s in m.body):
                continue  # only straight-line bodies in this property
            variables = {s.defined_var() for s in m.body} - {None}
            for at in range(len(m.body)):
                for var in variables:
                    assert len(ir.defs_of_at(m, at, var)) <= 1


class TestDefsOracle:
    def test_fuzzed_methods_match_path_enumeration(self):
        rng = random.Random(0xDEF5)
        checked = 0
        for _ in range(150):
            m = method_of(random_straightline_method(rng, max_stmts=14))
            if len(m.body) > 20:
                continue
            variables = sorted({s.defined_var() for s in m.body} - {None})
            for at in range(len(m.body)):
                for var in variables:
                    got = ir.defs_of_at(m, at, var)
                    want = reaching_defs_paths(m, at, var)
                    assert got == want, (render_program_snippet(m), at, var)
                    checked += 1
        assert checked > 500


def render_program_snippet(method):
    return "\n".join(ir.render_stmt(s) for s in method.body)
