// minifloat_mul_e4_m3: C verification harness.
// Generated from the model instance; edit the instance, not this file.
//
// The bit-precise typedefs below make every operation width-exact, so
// the checker sees the same arithmetic the untimed reference defines.

typedef unsigned __CPROVER_bitvector[1] u1;
typedef unsigned __CPROVER_bitvector[3] u3;
typedef unsigned __CPROVER_bitvector[4] u4;
typedef unsigned __CPROVER_bitvector[6] u6;
typedef unsigned __CPROVER_bitvector[7] u7;
typedef unsigned __CPROVER_bitvector[8] u8;
typedef unsigned __CPROVER_bitvector[40] u40;

u8 nondet_u8(void);

static void minifloat_mul_e4_m3_alg(u8 x_i, u8 y_i, u8 *p_o)
{
    u1 sr = ((u1)(x_i >> 7)) ^ ((u1)(y_i >> 7));
    u4 mx = (((u4)(x_i >> 3)) == 0) ? ((u4)(((u3)(x_i)))) : (((u4)(1) << 3) | (u4)(((u3)(x_i))));
    u4 my = (((u4)(y_i >> 3)) == 0) ? ((u4)(((u3)(y_i)))) : (((u4)(1) << 3) | (u4)(((u3)(y_i))));
    u8 prod = ((u8)(mx)) * ((u8)(my));
    u6 esum = ((u6)(((((u4)(x_i >> 3)) == 0) ? 1 : ((u4)(x_i >> 3))))) + ((u6)(((((u4)(y_i >> 3)) == 0) ? 1 : ((u4)(y_i >> 3)))));
    u40 acc = ((u40)(prod)) << esum;
    u6 er_raw = ((u1)(acc >> 35)) ? 22 : (((u1)(acc >> 34)) ? 21 : (((u1)(acc >> 33)) ? 20 : (((u1)(acc >> 32)) ? 19 : (((u1)(acc >> 31)) ? 18 : (((u1)(acc >> 30)) ? 17 : (((u1)(acc >> 29)) ? 16 : (((u1)(acc >> 28)) ? 15 : (((u1)(acc >> 27)) ? 14 : (((u1)(acc >> 26)) ? 13 : (((u1)(acc >> 25)) ? 12 : (((u1)(acc >> 24)) ? 11 : (((u1)(acc >> 23)) ? 10 : (((u1)(acc >> 22)) ? 9 : (((u1)(acc >> 21)) ? 8 : (((u1)(acc >> 20)) ? 7 : (((u1)(acc >> 19)) ? 6 : (((u1)(acc >> 18)) ? 5 : (((u1)(acc >> 17)) ? 4 : (((u1)(acc >> 16)) ? 3 : (((u1)(acc >> 15)) ? 2 : (((u1)(acc >> 14)) ? (u6)(1) : 0)))))))))))))))))))));
    u6 sh = (er_raw == 0) ? 11 : (10 + er_raw);
    u40 q = acc >> sh;
    u40 rem = acc & (((u40)(1) << sh) - 1);
    u40 half = (u40)(1) << (sh - 1);
    u1 roundup = (rem > half) || ((rem == half) && (((u1)(q)) == 1));
    u40 qr = q + ((u40)(roundup));
    u6 er2 = (er_raw == 0) ? ((qr == 8) ? (u6)(1) : 0) : ((qr == 16) ? (er_raw + 1) : er_raw);
    u40 fr = (qr == 16) ? 8 : qr;
    u7 body = ((u7)(((u4)(er2))) << 3) | (u7)(((u3)(fr)));
    u1 nan_case = ((((((u4)(x_i >> 3)) == 15) && (((u3)(x_i)) != 0)) || ((((u4)(y_i >> 3)) == 15) && (((u3)(y_i)) != 0))) || (((((u4)(x_i >> 3)) == 15) && (((u3)(x_i)) == 0)) && ((((u4)(y_i >> 3)) == 0) && (((u3)(y_i)) == 0)))) || (((((u4)(y_i >> 3)) == 15) && (((u3)(y_i)) == 0)) && ((((u4)(x_i >> 3)) == 0) && (((u3)(x_i)) == 0)));
    u1 inf_case = (((((u4)(x_i >> 3)) == 15) && (((u3)(x_i)) == 0)) || ((((u4)(y_i >> 3)) == 15) && (((u3)(y_i)) == 0))) || (er2 >= 15);
    u1 zero_case = ((((u4)(x_i >> 3)) == 0) && (((u3)(x_i)) == 0)) || ((((u4)(y_i >> 3)) == 0) && (((u3)(y_i)) == 0));
    *p_o = nan_case ? 124 : (((u8)(sr) << 7) | (u8)((inf_case ? 120 : (zero_case ? 0 : body))));
}

void minifloat_mul_e4_m3_harness(void)
{
    u8 x_i = nondet_u8();
    u8 y_i = nondet_u8();
    u8 p_o;
    minifloat_mul_e4_m3_alg(x_i, y_i, &p_o);

//Requirement 0: NaN propagates
if((((((u4)(x_i >> 3)) == 15) && (((u3)(x_i)) != 0)) || ((((u4)(y_i >> 3)) == 15) && (((u3)(y_i)) != 0)))){
__CPROVER_assert((p_o == 124), "NaN propagates");
}


//Requirement 1: Infinity times zero
if(((((((u4)(x_i >> 3)) == 15) && (((u3)(x_i)) == 0)) && ((((u4)(y_i >> 3)) == 0) && (((u3)(y_i)) == 0))) || (((((u4)(y_i >> 3)) == 15) && (((u3)(y_i)) == 0)) && ((((u4)(x_i >> 3)) == 0) && (((u3)(x_i)) == 0))))){
__CPROVER_assert((p_o == 124), "Infinity times zero");
}


//Requirement 2: One is identity
if(((y_i == 56) && (! ((((u4)(x_i >> 3)) == 15) && (((u3)(x_i)) != 0))))){
__CPROVER_assert((p_o == x_i), "One is identity");
}


//Requirement 3: Zero times finite
if(((((((u4)(x_i >> 3)) == 0) && (((u3)(x_i)) == 0)) && (! ((((u4)(y_i >> 3)) == 15) && (((u3)(y_i)) != 0)))) && (! ((((u4)(y_i >> 3)) == 15) && (((u3)(y_i)) == 0))))){
__CPROVER_assert((p_o == (((u8)((((u1)(x_i >> 7)) ^ ((u1)(y_i >> 7)))) << 7) | (u8)(0))), "Zero times finite");
}
}
