//! Built-in polynomials, witness point sets and region presets.

use crate::exact::Rational;
use crate::poly::Poly2;
use crate::region::{Region, SymmetricAtom};

/// Builds a polynomial symmetric in `x` and `y` from its lower triangle
/// (entries with `dx >= dy`).
fn symmetric(lower: &[(u32, u32, &str)]) -> Poly2 {
    let mut terms = Vec::with_capacity(2 * lower.len());
    for &(i, j, c) in lower {
        terms.push((i, j, c));
        if i != j {
            terms.push((j, i, c));
        }
    }
    Poly2::from_decimal_terms(&terms).expect("packaged coefficients are valid decimals")
}

const Q_TERMS: [(u32, u32, &str); 18] = [
    (1, 0, "-12.543"),
    (2, 0, "53.838"),
    (3, 0, "-12.954"),
    (4, 0, "-13.063"),
    (5, 0, "-7.914"),
    (6, 0, "-2.9"),
    (7, 0, "3.607"),
    (8, 0, "1.575"),
    (1, 1, "124.68"),
    (2, 1, "-183.789"),
    (3, 1, "1.878"),
    (4, 1, "50.255"),
    (2, 2, "117.628"),
    (3, 2, "73.149"),
    (4, 2, "-48.646"),
    (3, 3, "-65.928"),
    (4, 3, "8.734"),
    (4, 4, "1.098"),
];

const R_TERMS: [(u32, u32, &str); 10] = [
    (2, 0, "-24.04"),
    (4, 0, "39.64"),
    (6, 0, "-13.14"),
    (8, 0, "3.82"),
    (1, 1, "-15.76"),
    (3, 1, "-119.88"),
    (2, 2, "484.32"),
    (4, 2, "-153.28"),
    (3, 3, "192.44"),
    (4, 4, "8.2"),
];

const P1_TERMS: [(u32, u32, &str); 18] = [
    (1, 0, "-9.6430622783853"),
    (1, 1, "108.9702541224326"),
    (2, 0, "49.2216326267277"),
    (2, 1, "-180.0171980017891"),
    (2, 2, "125.0609266454326"),
    (3, 0, "-9.225013979636"),
    (3, 1, "6.9445854923998"),
    (3, 2, "68.1838852970187"),
    (3, 3, "-66.0585984730189"),
    (4, 0, "-11.7940568488902"),
    (4, 1, "49.3497768306"),
    (4, 2, "-48.7776655621495"),
    (4, 3, "9.217112694634"),
    (4, 4, "1"),
    (5, 0, "-10.4048835085938"),
    (6, 0, "-3.4018229998967"),
    (7, 0, "4.1057063608821"),
    (8, 0, "1.7252053549918"),
];

const P2_TERMS: [(u32, u32, &str); 10] = [
    (1, 1, "-0.9148488345531369"),
    (2, 0, "-2.0489539067392863"),
    (2, 2, "44.9702636684728257"),
    (3, 1, "-10.7425748658745577"),
    (3, 3, "16.8692193520802346"),
    (4, 0, "3.6839213331709682"),
    (4, 2, "-14.3548663298347627"),
    (4, 4, "1"),
    (6, 0, "-1.4264194026272393"),
    (8, 0, "0.4106920221952855"),
];

/// Certificate for the sum bound −2.47.
pub fn q() -> Poly2 {
    symmetric(&Q_TERMS)
}

/// Certificate for the product bound −1.57.
pub fn r() -> Poly2 {
    symmetric(&R_TERMS)
}

/// Near-optimal certificate for the sum bound.
pub fn p1() -> Poly2 {
    symmetric(&P1_TERMS)
}

/// Near-optimal certificate for the product bound.
pub fn p2() -> Poly2 {
    symmetric(&P2_TERMS)
}

/// Lower-triangle coefficient tables, as printed, for checksum tests.
pub fn coefficient_table(name: &str) -> Option<&'static [(u32, u32, &'static str)]> {
    match name {
        "q" => Some(&Q_TERMS),
        "r" => Some(&R_TERMS),
        "p1" => Some(&P1_TERMS),
        "p2" => Some(&P2_TERMS),
        _ => None,
    }
}

pub fn polynomial(name: &str) -> Option<Poly2> {
    match name {
        "q" => Some(q()),
        "r" => Some(r()),
        "p1" => Some(p1()),
        "p2" => Some(p2()),
        _ => None,
    }
}

pub const POLYNOMIAL_NAMES: [&str; 4] = ["q", "r", "p1", "p2"];

const APPENDIX_A1: [(&str, &str); 33] = [
    ("0.40233388785758", "-0.68162727157206"),
    ("-0.68162490825764", "0.40233317377632"),
    ("-0.03593446385013", "1.4223373527278"),
    ("-0.58181793464029", "1.65045045907013"),
    ("0.59759350821447", "-1.78077844166752"),
    ("1.53829446803677", "1.53829443533382"),
    ("-1.48621983094263", "1.99140650840038"),
    ("1.42233731135369", "-0.03593490350603"),
    ("0.05438775487699", "0.05438886977203"),
    ("-1.78077900893326", "0.59759354704086"),
    ("1.99140617335252", "-1.4862186561741"),
    ("-1.40798021804983", "-1.06840257328206"),
    ("0.59759347905152", "-1.78077910495742"),
    ("-1.48621965507992", "1.99140661320125"),
    ("1.12294676572784", "1.12294624842174"),
    ("1.42233869303903", "-0.03593747650892"),
    ("1.65045062298356", "-0.58181827821828"),
    ("0.40233336753712", "-0.6816247052117"),
    ("-0.68162690245729", "0.40233386944888"),
    ("0.40233322519093", "-0.681625459605"),
    ("1.12294556005286", "1.12294583096732"),
    ("-0.03593985561373", "1.42233955543634"),
    ("-0.58181951983038", "1.65045131684197"),
    ("1.99140650540332", "-1.48621961266743"),
    ("1.65045237751894", "-0.58182231464692"),
    ("-1.78077877657724", "0.59759334939547"),
    ("-1.06840211927449", "-1.4079806720575"),
    ("1.53829124404177", "1.53829176844063"),
    ("-1.40797805061751", "-1.06840474071448"),
    ("1.9914061436234", "-1.48622121985896"),
    ("0.59759450830252", "-1.7807799162483"),
    ("-1.4862239646326", "1.99140795748714"),
    ("-1.40798623761224", "-1.06839655371975"),
];

const APPENDIX_A2: [(&str, &str); 33] = [
    ("0.15506049352336642", "0.82103437036363329"),
    ("-1.07751316618925008", "-2"),
    ("-0.55343613654977384", "-1.64723374649387681"),
    ("-0.15506048529352139", "-0.82103434384587391"),
    ("1.64723372391649941", "0.5534361137417255"),
    ("-1.9731805874505989", "-2"),
    ("0.82103437282171523", "0.15506048372780666"),
    ("1.07134858923922885", "-1.47342166359409476"),
    ("-0.82103433524791835", "-0.15506047870672044"),
    ("0.15506046708915971", "0.82103431347805562"),
    ("2", "1.07751316910812552"),
    ("-2", "-1.07751316683949198"),
    ("1.64723377312861428", "0.55343615943553201"),
    ("0.55343612726989892", "1.64723373754207403"),
    ("1.97318058013085052", "2"),
    ("1.07751316252419741", "2"),
    ("0.82103432514680383", "0.1550604774370247"),
    ("1.07134859824340295", "-1.47342165121068827"),
    ("-1.64723372758280026", "-0.5534361192094094"),
    ("-1.64723373704703668", "-0.55343612092654846"),
    ("-0.15506049299061308", "-0.82103439731133801"),
    ("-2", "-1.97318058198809136"),
    ("2", "1.9731805809913704"),
    ("1.47342165529506514", "-1.07134859527358692"),
    ("1.07751320597324756", "2"),
    ("-1.47342164800053422", "1.07134860057755775"),
    ("-2", "-1.97318060745136972"),
    ("-1.47342169316353921", "1.07134856773881076"),
    ("-1.0713485853406953", "1.47342166895573339"),
    ("-1.0775132033440292", "-2"),
    ("1.64723371168303767", "0.55343607239179169"),
    ("2", "1.97318056276917512"),
    ("1.07134859374131587", "-1.47342165740239169"),
];

/// Raw decimal strings of a packaged point list.
pub fn point_strings(name: &str) -> Option<&'static [(&'static str, &'static str)]> {
    match name {
        "appendix-a1" => Some(&APPENDIX_A1),
        "appendix-a2" => Some(&APPENDIX_A2),
        _ => None,
    }
}

/// Exact coordinates of a packaged point list.
pub fn points(name: &str) -> Option<Vec<(Rational, Rational)>> {
    point_strings(name).map(|pts| {
        pts.iter()
            .map(|(x, y)| {
                (
                    Rational::parse_decimal(x).expect("packaged decimal"),
                    Rational::parse_decimal(y).expect("packaged decimal"),
                )
            })
            .collect()
    })
}

/// Witness for the sum bound, points with coordinate sum ≥ −2.4763827913320.
pub fn appendix_a1() -> Vec<(Rational, Rational)> {
    points("appendix-a1").unwrap()
}

/// Witness for the product bound, points with product ≥ −1.5785482206460513.
pub fn appendix_a2() -> Vec<(Rational, Rational)> {
    points("appendix-a2").unwrap()
}

pub const POINT_SET_NAMES: [&str; 2] = ["appendix-a1", "appendix-a2"];

/// A generic-case witness: conjugate-pair atoms with exact weights.
#[derive(Clone, Debug)]
pub struct SymmetricWitness {
    pub atoms: Vec<SymmetricAtom>,
    pub weights: Vec<Rational>,
    pub region: Region,
}

fn witness(
    atoms: &[((i64, i64), (i64, i64))],
    weights: &[(i64, i64)],
    region: Region,
) -> SymmetricWitness {
    SymmetricWitness {
        atoms: atoms
            .iter()
            .map(|&((a, b), (c, d))| {
                SymmetricAtom::new(Rational::new(a, b), Rational::new(c, d)).expect("realizable")
            })
            .collect(),
        weights: weights.iter().map(|&(n, d)| Rational::new(n, d)).collect(),
        region,
    }
}

/// Optimal measure for the lower bound on `x + y`.
pub fn a1_opt() -> SymmetricWitness {
    witness(
        &[((2, 1), (0, 1)), ((1, 2), (-3, 1)), ((-2, 3), (-2, 3))],
        &[(1, 6), (4, 21), (9, 14)],
        Region::sum_geq(Rational::new(-2, 3)),
    )
}

/// Optimal measure for the upper bound on `xy`.
pub fn a2max_opt() -> SymmetricWitness {
    witness(
        &[((0, 1), (-4, 1)), ((5, 3), (-2, 3)), ((-2, 3), (-2, 3))],
        &[(1, 10), (9, 35), (9, 14)],
        Region::product_leq(Rational::new(-2, 3)),
    )
}

/// Optimal measure for the lower bound on `xy`.
pub fn a2min_opt() -> SymmetricWitness {
    witness(
        &[
            ((4, 1), (4, 1)),
            ((-4, 1), (4, 1)),
            ((7, 5), (-6, 5)),
            ((-2, 7), (-6, 5)),
        ],
        &[(1, 52), (1, 52), (125, 767), (1225, 1534)],
        Region::product_geq(Rational::new(-6, 5)),
    )
}

pub fn symmetric_witness(name: &str) -> Option<SymmetricWitness> {
    match name {
        "a1-opt" => Some(a1_opt()),
        "a2max-opt" => Some(a2max_opt()),
        "a2min-opt" => Some(a2min_opt()),
        _ => None,
    }
}

pub const WITNESS_NAMES: [&str; 3] = ["a1-opt", "a2max-opt", "a2min-opt"];

/// Named region bounds: the rounded ones used with `q` and `r` and the
/// thirteen-digit thresholds bracketing the optimum.
pub fn region_preset(name: &str) -> Option<Region> {
    let d = |s: &str| Rational::parse_decimal(s).expect("packaged decimal");
    Some(match name {
        "sum-rounded" => Region::sum_geq(d("-2.47")),
        "product-rounded" => Region::product_geq(d("-1.57")),
        "sum-certificate" => Region::sum_geq(d("-2.4763827913319")),
        "sum-witness" => Region::sum_geq(d("-2.4763827913320")),
        "product-certificate" => Region::product_geq(d("-1.578548220646049")),
        "product-witness" => Region::product_geq(d("-1.5785482206460513")),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::symmetric_atom_in_region;

    #[test]
    fn table_shapes() {
        assert_eq!(q().len(), 32);
        assert_eq!(r().len(), 16);
        assert_eq!(p1().len(), 32);
        assert_eq!(p2().len(), 16);
        for name in POLYNOMIAL_NAMES {
            let p = polynomial(name).unwrap();
            assert_eq!(p.swap_xy(), p, "{name}");
            assert!(p.constant_term().is_zero());
        }
        assert_eq!(appendix_a1().len(), 33);
        assert_eq!(appendix_a2().len(), 33);
    }

    #[test]
    fn witnesses_sit_in_their_regions() {
        for name in WITNESS_NAMES {
            let w = symmetric_witness(name).unwrap();
            assert_eq!(
                w.weights.iter().sum::<Rational>(),
                Rational::one(),
                "{name}"
            );
            for a in &w.atoms {
                assert!(symmetric_atom_in_region(a, &w.region).unwrap(), "{name}");
            }
        }
    }

    #[test]
    fn appendix_points_respect_bounds() {
        let s = region_preset("sum-witness").unwrap();
        assert!(appendix_a1().iter().all(|(x, y)| s.contains_rational(x, y)));
        let p = region_preset("product-witness").unwrap();
        assert!(appendix_a2().iter().all(|(x, y)| p.contains_rational(x, y)));
    }
}
