"""Pure-Python propagation kernel; the fallback backend.

See :mod:`flowcheck._ops` for the op encoding.  Masks are plain ints of
arbitrary width, frames are dicts mapping variable names to masks.
"""

from __future__ import annotations

from ._ops import (
    A_ADD,
    A_CLEAR,
    A_EVAL,
    A_MASK_FULL,
    A_MASK_REGION,
    APPLY,
    B_AND,
    B_CONST,
    B_NOT,
    B_OR,
    B_REF,
    CALL,
    M_AND,
    M_CONST,
    M_NOT,
    M_OR,
    M_REF,
    POP_BIND,
    PUSH,
    RETURN_VAR,
)
from .errors import PropagationError


def _mask(expr, env) -> int:
    tag = expr[0]
    if tag == M_REF:
        return env.get(expr[1], 0)
    if tag == M_CONST:
        return expr[1]
    if tag == M_AND:
        return _mask(expr[1], env) & _mask(expr[2], env)
    if tag == M_OR:
        return _mask(expr[1], env) | _mask(expr[2], env)
    # M_NOT carries the dictionary universe so complement stays bounded
    return expr[2] & ~_mask(expr[1], env)


def _truth(term, env) -> bool:
    tag = term[0]
    if tag == B_REF:
        return env.get(term[1], 0) & term[2] != 0
    if tag == B_CONST:
        return term[1]
    if tag == B_NOT:
        return not _truth(term[1], env)
    if tag == B_AND:
        return _truth(term[1], env) and _truth(term[2], env)
    return _truth(term[1], env) or _truth(term[2], env)


def apply_program(frame: dict, needs_pre: bool, assign_ops) -> None:
    """Run one assignment program in ``frame``, in place.

    Reads go against the frame state from before the program started;
    writes land in order, so the last assignment wins per target label.
    """
    pre = frame.copy() if needs_pre else frame
    for op in assign_ops:
        code = op[0]
        if code == A_ADD:
            target = op[1]
            frame[target] = frame.get(target, 0) | op[2]
        elif code == A_MASK_FULL:
            frame[op[1]] = _mask(op[2], pre)
        elif code == A_MASK_REGION:
            target = op[1]
            region = op[3]
            frame[target] = (frame.get(target, 0) & ~region) | (_mask(op[2], pre) & region)
        elif code == A_CLEAR:
            target = op[1]
            frame[target] = frame.get(target, 0) & ~op[2]
        else:  # A_EVAL
            add = 0
            clear = 0
            for bit, term in op[2]:
                if _truth(term, pre):
                    add |= bit
                else:
                    clear |= bit
            target = op[1]
            frame[target] = (frame.get(target, 0) & ~clear) | add


def run_sequence(ops) -> list[dict]:
    """Execute element ops and return one frame snapshot per element."""
    stack: list[dict] = []
    snapshots: list[dict] = []
    for op in ops:
        code = op[0]
        if code == APPLY:
            if not stack:
                raise PropagationError("no active frame")
            apply_program(stack[-1], op[1], op[2])
        elif code == PUSH:
            stack.append({})
        elif code == CALL:
            if not stack:
                raise PropagationError("no active frame")
            caller = stack[-1]
            frame = {}
            for param, var in op[1]:
                try:
                    frame[param] = caller[var]
                except KeyError:
                    raise PropagationError(
                        f"call binds parameter '{param}' to missing variable '{var}'"
                    ) from None
            stack.append(frame)
        elif code == POP_BIND:
            if len(stack) < 2:
                raise PropagationError("sequence pops more frames than it pushed")
            returned = stack.pop()
            frame = stack[-1]
            result_var = op[1]
            if result_var is not None:
                frame[result_var] = returned.get(RETURN_VAR, 0)
            program = op[2]
            if program is not None:
                apply_program(frame, program[0], program[1])
        else:
            raise PropagationError(f"unknown element op {code}")
        snapshots.append(stack[-1].copy())
    return snapshots
