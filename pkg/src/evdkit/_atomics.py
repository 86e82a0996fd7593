"""Atomic int64 array access for numba ``nogil`` kernels.

Plain loads in a spin loop may be hoisted by LLVM, so progress counters are
read with acquire loads and published with release stores.
"""

from llvmlite import ir
from numba import types
from numba.core import cgutils
from numba.extending import intrinsic


def _element_ptr(context, builder, aryty, ary, idx, idxty):
    arr = context.make_array(aryty)(context, builder, ary)
    idx = context.cast(builder, idx, idxty, types.intp)
    return cgutils.get_item_pointer(context, builder, aryty, arr, [idx], wraparound=False)


@intrinsic
def atomic_load(typingctx, ary, idx):
    """Acquire load of ``ary[idx]`` (int64 array)."""

    def codegen(context, builder, sig, args):
        ptr = _element_ptr(context, builder, sig.args[0], args[0], args[1], sig.args[1])
        return builder.load_atomic(ptr, "acquire", 8)

    return types.int64(ary, idx), codegen


@intrinsic
def atomic_store(typingctx, ary, idx, val):
    """Release store ``ary[idx] = val`` (int64 array)."""

    def codegen(context, builder, sig, args):
        ptr = _element_ptr(context, builder, sig.args[0], args[0], args[1], sig.args[1])
        v = context.cast(builder, args[2], sig.args[2], types.int64)
        builder.store_atomic(v, ptr, "release", 8)
        return context.get_dummy_value()

    return types.void(ary, idx, val), codegen


@intrinsic
def atomic_fetch_add(typingctx, ary, idx, val):
    """Sequentially consistent ``ary[idx] += val``; returns the old value."""

    def codegen(context, builder, sig, args):
        ptr = _element_ptr(context, builder, sig.args[0], args[0], args[1], sig.args[1])
        v = context.cast(builder, args[2], sig.args[2], types.int64)
        return builder.atomic_rmw("add", ptr, v, "seq_cst")

    return types.int64(ary, idx, val), codegen


@intrinsic
def sched_yield(typingctx):
    """Call libc ``sched_yield``; referenced by symbol name so kernels stay cacheable."""

    def codegen(context, builder, sig, args):
        fnty = ir.FunctionType(ir.IntType(32), [])
        fn = cgutils.get_or_insert_function(builder.module, fnty, "sched_yield")
        builder.call(fn, [])
        return context.get_dummy_value()

    return types.void(), codegen


__all__ = ["atomic_load", "atomic_store", "atomic_fetch_add", "sched_yield"]
