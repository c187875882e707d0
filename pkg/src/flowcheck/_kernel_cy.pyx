# cython: language_level=3
"""Compiled propagation kernel; behaviour mirrors ``_kernel_py`` exactly.

Masks stay Python ints (dictionaries can exceed machine word width), so
the win over the pure kernel is typed dispatch and loop overhead, not
the arithmetic itself.
"""

from . import _ops
from .errors import PropagationError

cdef int PUSH = _ops.PUSH
cdef int APPLY = _ops.APPLY
cdef int CALL = _ops.CALL
cdef int POP_BIND = _ops.POP_BIND

cdef int A_ADD = _ops.A_ADD
cdef int A_CLEAR = _ops.A_CLEAR
cdef int A_MASK_FULL = _ops.A_MASK_FULL
cdef int A_MASK_REGION = _ops.A_MASK_REGION
cdef int A_EVAL = _ops.A_EVAL

cdef int M_CONST = _ops.M_CONST
cdef int M_REF = _ops.M_REF
cdef int M_NOT = _ops.M_NOT
cdef int M_AND = _ops.M_AND
cdef int M_OR = _ops.M_OR

cdef int B_CONST = _ops.B_CONST
cdef int B_REF = _ops.B_REF
cdef int B_NOT = _ops.B_NOT
cdef int B_AND = _ops.B_AND
cdef int B_OR = _ops.B_OR

cdef str RETURN_VAR = _ops.RETURN_VAR


cdef object _mask(tuple expr, dict env):
    cdef int tag = expr[0]
    if tag == M_REF:
        return env.get(expr[1], 0)
    if tag == M_CONST:
        return expr[1]
    if tag == M_AND:
        return _mask(expr[1], env) & _mask(expr[2], env)
    if tag == M_OR:
        return _mask(expr[1], env) | _mask(expr[2], env)
    return expr[2] & ~_mask(expr[1], env)


cdef bint _truth(tuple term, dict env) except -1:
    cdef int tag = term[0]
    if tag == B_REF:
        return (env.get(term[1], 0) & term[2]) != 0
    if tag == B_CONST:
        return term[1]
    if tag == B_NOT:
        return not _truth(term[1], env)
    if tag == B_AND:
        return _truth(term[1], env) and _truth(term[2], env)
    return _truth(term[1], env) or _truth(term[2], env)


cdef int _apply(dict frame, bint needs_pre, tuple assign_ops) except -1:
    cdef dict pre
    cdef tuple op, pair
    cdef int code
    cdef object target, add, clear
    if needs_pre:
        pre = frame.copy()
    else:
        pre = frame
    for op in assign_ops:
        code = op[0]
        if code == A_ADD:
            target = op[1]
            frame[target] = frame.get(target, 0) | op[2]
        elif code == A_MASK_FULL:
            frame[op[1]] = _mask(op[2], pre)
        elif code == A_MASK_REGION:
            target = op[1]
            frame[target] = (frame.get(target, 0) & ~op[3]) | (_mask(op[2], pre) & op[3])
        elif code == A_CLEAR:
            target = op[1]
            frame[target] = frame.get(target, 0) & ~op[2]
        else:
            add = 0
            clear = 0
            for pair in op[2]:
                if _truth(pair[1], pre):
                    add = add | pair[0]
                else:
                    clear = clear | pair[0]
            target = op[1]
            frame[target] = (frame.get(target, 0) & ~clear) | add
    return 0


def run_sequence(ops):
    """Execute element ops and return one frame snapshot per element."""
    cdef list stack = []
    cdef list snapshots = []
    cdef dict frame, caller
    cdef tuple op, binding
    cdef object program, result_var
    cdef int code
    for op in ops:
        code = op[0]
        if code == APPLY:
            if not stack:
                raise PropagationError("no active frame")
            _apply(<dict> stack[-1], op[1], op[2])
        elif code == PUSH:
            stack.append({})
        elif code == CALL:
            if not stack:
                raise PropagationError("no active frame")
            caller = <dict> stack[-1]
            frame = {}
            for binding in op[1]:
                if binding[1] not in caller:
                    raise PropagationError(
                        "call binds parameter '%s' to missing variable '%s'"
                        % (binding[0], binding[1])
                    )
                frame[binding[0]] = caller[binding[1]]
            stack.append(frame)
        elif code == POP_BIND:
            if len(stack) < 2:
                raise PropagationError("sequence pops more frames than it pushed")
            frame = <dict> stack.pop()
            result_var = op[1]
            if result_var is not None:
                (<dict> stack[-1])[result_var] = frame.get(RETURN_VAR, 0)
            program = op[2]
            if program is not None:
                _apply(<dict> stack[-1], program[0], program[1])
        else:
            raise PropagationError("unknown element op %d" % code)
        snapshots.append((<dict> stack[-1]).copy())
    return snapshots
