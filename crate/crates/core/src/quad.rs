//! Fixed Gauss–Legendre rules on `[0, 1]`.

use crate::scalar::Scalar;

// Nodes and weights on [-1, 1]; only the non-negative half is listed.
const GL2: [(f64, f64); 1] = [(0.577_350_269_189_625_8, 1.0)];
const GL3: [(f64, f64); 2] = [(0.0, 0.888_888_888_888_888_9), (0.774_596_669_241_483_4, 0.555_555_555_555_555_6)];
const GL8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

fn unit_rule<T: Scalar>(half: &[(f64, f64)]) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(2 * half.len());
    for &(x, w) in half {
        if x == 0.0 {
            out.push((T::half(), T::lit(w / 2.0)));
        } else {
            out.push((T::lit((1.0 - x) / 2.0), T::lit(w / 2.0)));
            out.push((T::lit((1.0 + x) / 2.0), T::lit(w / 2.0)));
        }
    }
    out
}

/// Two-point rule, exact for cubics.
pub fn gauss2<T: Scalar>() -> Vec<(T, T)> {
    unit_rule(&GL2)
}

/// Three-point rule, exact for quintics.
pub fn gauss3<T: Scalar>() -> Vec<(T, T)> {
    unit_rule(&GL3)
}

/// Eight-point rule.
pub fn gauss8<T: Scalar>() -> Vec<(T, T)> {
    unit_rule(&GL8)
}

/// `∫_a^b f` with `rule` mapped onto `[a, b]`.
#[cfg(test)]
pub fn integrate<T: Scalar>(rule: &[(T, T)], a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
    let h = b - a;
    rule.iter().map(|&(u, w)| w * f(a + h * u)).sum::<T>() * h
}
