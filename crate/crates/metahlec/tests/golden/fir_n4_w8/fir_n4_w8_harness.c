// fir_n4_w8: C verification harness.
// Generated from the model instance; edit the instance, not this file.
//
// The bit-precise typedefs below make every operation width-exact, so
// the checker sees the same arithmetic the untimed reference defines.

typedef unsigned __CPROVER_bitvector[8] u8;

u8 nondet_u8(void);

static void fir_n4_w8_alg(u8 x0_i, u8 x1_i, u8 x2_i, u8 x3_i, u8 x4_i, u8 *y_o)
{
    *y_o = ((((x0_i * 1) + (x1_i * 3)) + (x2_i * 5)) + (x3_i * 7)) + (x4_i * 9);
}

void fir_n4_w8_harness(void)
{
    u8 x0_i = nondet_u8();
    u8 x1_i = nondet_u8();
    u8 x2_i = nondet_u8();
    u8 x3_i = nondet_u8();
    u8 x4_i = nondet_u8();
    u8 y_o;
    fir_n4_w8_alg(x0_i, x1_i, x2_i, x3_i, x4_i, &y_o);

//Requirement 0: Zero window
if((((((x0_i == 0) && (x1_i == 0)) && (x2_i == 0)) && (x3_i == 0)) && (x4_i == 0))){
__CPROVER_assert((y_o == 0), "Zero window");
}


//Requirement 1: Impulse response
if(((((x1_i == 0) && (x2_i == 0)) && (x3_i == 0)) && (x4_i == 0))){
__CPROVER_assert((y_o == (x0_i * 1)), "Impulse response");
}


//Requirement 2: Oldest tap
if(((((x0_i == 0) && (x1_i == 0)) && (x2_i == 0)) && (x3_i == 0))){
__CPROVER_assert((y_o == (x4_i * 9)), "Oldest tap");
}
}
