"""Opcode constants for lowered propagation programs.

A sequence is lowered to a flat list of element ops; each op is a plain
tuple with an int opcode first, so kernels dispatch without touching the
model layer.  Frames map variable names to label bit masks (plain ints).

Element ops:

    (PUSH,)                                   push an empty frame
    (APPLY, needs_pre, assign_ops)            run assignments in the top frame
    (CALL, bindings)                          push a frame holding only the
                                              bound parameters; ``bindings``
                                              is ((param, caller_var), ...)
    (POP_BIND, result_var, program_or_None)   pop the callee frame, bind its
                                              RETURN mask to ``result_var`` in
                                              the caller, then run the result
                                              assignments there

Assignment ops (``target`` is a variable name):

    (A_ADD, target, mask)                     or the mask in
    (A_CLEAR, target, mask)                   remove the mask
    (A_MASK_FULL, target, expr)               replace the whole variable
    (A_MASK_REGION, target, expr, region)     replace only the region bits
    (A_EVAL, target, ((bit, term), ...))      per-label truth evaluation

Mask expressions (evaluate to an int mask against the pre-state):

    (M_CONST, mask) | (M_REF, var) | (M_NOT, sub, universe)
    | (M_AND, a, b) | (M_OR, a, b)

Boolean terms (evaluate to a truth value against the pre-state):

    (B_CONST, bool) | (B_REF, var, mask) | (B_NOT, sub)
    | (B_AND, a, b) | (B_OR, a, b)

All assignment ops of one APPLY read the frame state from before the
APPLY (``needs_pre`` marks programs that read at all), while writes land
in declaration order, so later assignments win on conflicting targets.
"""

PUSH = 0
APPLY = 1
CALL = 2
POP_BIND = 3

A_ADD = 0
A_CLEAR = 1
A_MASK_FULL = 2
A_MASK_REGION = 3
A_EVAL = 4

M_CONST = 0
M_REF = 1
M_NOT = 2
M_AND = 3
M_OR = 4

B_CONST = 0
B_REF = 1
B_NOT = 2
B_AND = 3
B_OR = 4

RETURN_VAR = "RETURN"
