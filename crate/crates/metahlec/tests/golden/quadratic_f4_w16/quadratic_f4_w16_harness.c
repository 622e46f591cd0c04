// quadratic_f4_w16: C verification harness.
// Generated from the model instance; edit the instance, not this file.
//
// The bit-precise typedefs below make every operation width-exact, so
// the checker sees the same arithmetic the untimed reference defines.

typedef unsigned __CPROVER_bitvector[1] u1;
typedef unsigned __CPROVER_bitvector[16] u16;
typedef unsigned __CPROVER_bitvector[32] u32;
typedef signed __CPROVER_bitvector[16] s16;
typedef signed __CPROVER_bitvector[32] s32;

s16 nondet_s16(void);

static void quadratic_f4_w16_alg(s16 a_i, s16 b_i, s16 c_i, s16 x_i, s16 *y_o)
{
    s32 xw = (s32)(x_i);
    s32 aw = (s32)(a_i);
    s32 bw = (s32)(b_i);
    s32 cw = (s32)(c_i);
    s32 p_xx = xw * xw;
    s32 xx = (p_xx + ((s32)(((u1)(p_xx >> 31)) ? (u32)(15) : 0))) >> 4;
    s32 p_axx = aw * xx;
    s32 t_a = (p_axx + ((s32)(((u1)(p_axx >> 31)) ? (u32)(15) : 0))) >> 4;
    s32 p_bx = bw * xw;
    s32 t_b = (p_bx + ((s32)(((u1)(p_bx >> 31)) ? (u32)(15) : 0))) >> 4;
    s32 sum = (t_a + t_b) + cw;
    *y_o = (s16)((u16)(sum));
}

void quadratic_f4_w16_harness(void)
{
    s16 a_i = nondet_s16();
    s16 b_i = nondet_s16();
    s16 c_i = nondet_s16();
    s16 x_i = nondet_s16();
    s16 y_o;
    quadratic_f4_w16_alg(a_i, b_i, c_i, x_i, &y_o);

//Requirement 0: Unit input
if((x_i == 16)){
__CPROVER_assert((y_o == ((s16)((u16)(((((s32)(a_i)) + ((s32)(b_i))) + ((s32)(c_i))))))), "Unit input");
}


//Requirement 1: Zero input
if((x_i == 0)){
__CPROVER_assert((y_o == c_i), "Zero input");
}
}
