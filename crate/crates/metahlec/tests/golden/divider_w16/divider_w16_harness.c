// divider_w16: C verification harness.
// Generated from the model instance; edit the instance, not this file.
//
// The bit-precise typedefs below make every operation width-exact, so
// the checker sees the same arithmetic the untimed reference defines.

typedef unsigned __CPROVER_bitvector[1] u1;
typedef unsigned __CPROVER_bitvector[16] u16;

u16 nondet_u16(void);

static void divider_w16_alg(u16 a_i, u16 b_i, u16 *quotient_o, u1 *divide_by_0_o)
{
    *quotient_o = (b_i == 0) ? 65535 : (a_i / b_i);
    *divide_by_0_o = b_i == 0;
}

void divider_w16_harness(void)
{
    u16 a_i = nondet_u16();
    u16 b_i = nondet_u16();
    u16 quotient_o;
    u1 divide_by_0_o;
    divider_w16_alg(a_i, b_i, &quotient_o, &divide_by_0_o);

//Requirement 0: Division by zero
if((b_i == 0)){
__CPROVER_assert((divide_by_0_o == 1), "Flag set");

__CPROVER_assert(((~ quotient_o) == 0), "Division by zero");
}


//Requirement 1: Divisor not 0
if((b_i != 0)){
__CPROVER_assert((divide_by_0_o == 0), "Flag clear");

__CPROVER_assert((quotient_o == (a_i / b_i)), "Quotient");
}
}
