// enable_pipe_w8: C verification harness.
// Generated from the model instance; edit the instance, not this file.
//
// The bit-precise typedefs below make every operation width-exact, so
// the checker sees the same arithmetic the untimed reference defines.

typedef unsigned __CPROVER_bitvector[8] u8;

u8 nondet_u8(void);

static void enable_pipe_w8_alg(u8 x_i, u8 *y_o)
{
    *y_o = x_i + 1;
}

void enable_pipe_w8_harness(void)
{
    u8 x_i = nondet_u8();
    __CPROVER_assume(((x_i != 0) && (x_i <= 200)));
    u8 y_o;
    enable_pipe_w8_alg(x_i, &y_o);

//Requirement 0: Increment
if((x_i != 0)){
__CPROVER_assert((y_o == (x_i + 1)), "Increment");
}
}
