import random

import pytest

from rooplpp import (build_class_map, check_program, invert_program,
                     invert_stmt, parse, parse_statement, pretty_print)
from rooplpp import syntax as ast

from astgen import make_program, random_statement
from conftest import CORPUS


def inv(source):
    return invert_stmt(parse_statement(source))


@pytest.mark.parametrize("source,expected", [
    ("x += y + 1", "x -= y + 1"),
    ("x -= y", "x += y"),
    ("x ^= 3", "x ^= 3"),
    ("a[i] += 2", "a[i] -= 2"),
    ("x <=> y", "x <=> y"),
    ("skip", "skip"),
    ("new K x", "delete K x"),
    ("delete K x", "new K x"),
    ("new int[5] a", "delete int[5] a"),
    ("copy K x y", "uncopy K x y"),
    ("uncopy K x y", "copy K x y"),
    ("call q(a, b)", "uncall q(a, b)"),
    ("uncall q()", "call q()"),
    ("call o::q(a)", "uncall o::q(a)"),
    ("uncall o::q(a)", "call o::q(a)"),
])
def test_inversion_table(source, expected):
    assert inv(source) == parse_statement(expected)


def test_sequence_reversed_elementwise():
    assert inv("x += 1 y -= 2 call q()") == \
        parse_statement("uncall q() y += 2 x -= 1")


def test_if_swaps_condition_and_assertion():
    assert inv("if e1 = 0 then x += 1 else x -= 1 fi e2 = 0") == \
        parse_statement("if e2 = 0 then x -= 1 else x += 1 fi e1 = 0")


def test_loop_swaps_condition_and_assertion():
    assert inv("from a = 0 do x += 1 loop y += 1 until b = 9") == \
        parse_statement("from b = 9 do x -= 1 loop y -= 1 until a = 0")


def test_object_block_keeps_brackets():
    assert inv("construct K t x += 1 destruct t") == \
        parse_statement("construct K t x -= 1 destruct t")


def test_local_block_swaps_expressions():
    assert inv("local int t = a + 1 t += 1 delocal int t = b - 1") == \
        parse_statement("local int t = b - 1 t -= 1 delocal int t = a + 1")


def test_involution_examples():
    for source in ("x += y", "if a = 0 then skip else x ^= 2 fi b = 0",
                   "from a = 0 do new K x loop skip until a = 5"):
        stmt = parse_statement(source)
        assert invert_stmt(invert_stmt(stmt)) == stmt


def test_involution_random_smoke():
    rng = random.Random(11)
    for _ in range(500):
        stmt = random_statement(rng, depth=3)
        assert invert_stmt(invert_stmt(stmt)) == stmt


def test_program_inverter_keeps_calls():
    program = parse("""
class Main
    int x

    method q(int a)
        a += 1

    method main()
        local int a = 0
        call q(a)
        x += 1
        delocal int a = 1
""")
    inverted = invert_program(program)
    body = inverted.classes[0].methods[1].body
    # sequence reversed; the call survives as a call, the += flips
    assert body == parse_statement(
        "local int a = 1 x -= 1 call q(a) delocal int a = 0")


def test_program_inverter_keeps_nested_calls():
    program = parse("""
class Main
    int x

    method q(int a)
        a += 1

    method main()
        if x = 0 then
            local int a = 0
            call q(a)
            delocal int a = 1
        else skip
        fi x = 0
""")
    inverted = invert_program(program)
    text = pretty_print(inverted)
    assert "call q(a)" in text
    assert "uncall" not in text


def test_skip_program_inverts_to_itself():
    program = parse("class C method main() skip")
    assert invert_program(program) == program


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_inverted_corpus_type_checks(path):
    program = parse(path.read_text())
    inverted = invert_program(program)
    class_map = build_class_map(inverted)
    assert check_program(inverted, class_map) == []


def test_inverted_generated_programs_type_check():
    for seed in range(25):
        program, _ = make_program(seed)
        inverted = invert_program(program)
        class_map = build_class_map(inverted)
        assert check_program(inverted, class_map) == []
