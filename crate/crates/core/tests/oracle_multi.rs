use paratower_core::lattice::MultiIndex;
use paratower_core::ring::closed_form::ClosedForm;
use paratower_core::ring::{closed_form_nc, pair_monomial, ExtraT, TowerClass, TowerMonomial, TowerShape};
use paratower_core::selftest::{curve_geometry, plane_geometry};
use paratower_core::Rational;
use num_traits::One;

fn compositions(parts: usize, total: u32) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    (0..=total)
        .flat_map(|first| {
            compositions(parts - 1, total - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Sweeps every monomial of pairing degree and returns how many the closed form decided.
fn sweep(shape: &TowerShape) -> usize {
    let ranks = shape.ranks().to_vec();
    let g = shape.base().generator_count();
    let fiber: usize = ranks.iter().map(|r| 2 * r).sum();
    let total = shape.pairing_dim();
    let mut extras = vec![None];
    for (u, &r) in ranks.iter().enumerate() {
        extras.extend((1..=r).map(|level| Some(ExtraT { component: u + 1, level })));
    }
    let mut decided = 0;
    for extra in extras {
        let rest = total - u32::from(extra.is_some());
        for fiber_deg in 0..=rest {
            for exps in compositions(fiber, fiber_deg) {
                let mut p = Vec::new();
                let mut q = Vec::new();
                let mut at = 0;
                for &r in &ranks {
                    p.push(MultiIndex::new(exps[at..at + r].to_vec()));
                    q.push(MultiIndex::new(exps[at + r..at + 2 * r].to_vec()));
                    at += 2 * r;
                }
                // eta must be a pure power of w so that it lives on the base
                let mut eta_exps = vec![0; g];
                eta_exps[0] = rest - fiber_deg;
                let mut t: Vec<Vec<u32>> = q.iter().map(|x| x.exps().to_vec()).collect();
                if let Some(x) = extra {
                    t[x.component - 1][x.level - 1] += 1;
                }
                let zeros: Vec<Vec<u32>> = ranks.iter().map(|&r| vec![0; r]).collect();
                let m = TowerMonomial::from_parts(eta_exps.clone(), p.iter().map(|x| x.exps().to_vec()).collect(), t);
                let eta = TowerClass::monomial(TowerMonomial::from_parts(eta_exps, zeros.clone(), zeros), Rational::one());
                let engine = match pair_monomial(shape, &m) {
                    Ok(v) => v,
                    // w^k beyond the base dimension has no table entry
                    Err(_) => continue,
                };
                if let ClosedForm::Value(v) = closed_form_nc(shape, &p, &q, &eta, extra).unwrap() {
                    decided += 1;
                    assert_eq!(v, engine, "{} with extra {extra:?}", m.render(shape));
                }
            }
        }
    }
    decided
}

#[test]
fn two_components_on_curves() {
    for ranks in [vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]] {
        let shape = curve_geometry(ranks.clone(), &[1, 2]).unwrap();
        assert!(sweep(&shape) > 0, "{ranks:?}");
    }
}

#[test]
fn two_components_on_the_plane() {
    for ranks in [vec![1, 1], vec![1, 2]] {
        let shape = plane_geometry(ranks.clone(), &[1, 2]).unwrap();
        assert!(sweep(&shape) > 0, "{ranks:?}");
    }
}

#[test]
fn mixed_pattern_on_two_components() {
    let shape = curve_geometry(vec![1, 1], &[1, 2]).unwrap();
    let one = TowerClass::one(&shape);
    let p = [MultiIndex::new(vec![0]), MultiIndex::new(vec![1])];
    let q = [MultiIndex::new(vec![1]), MultiIndex::new(vec![0])];
    let v = closed_form_nc(&shape, &p, &q, &one, Some(ExtraT { component: 1, level: 1 })).unwrap();
    assert_eq!(v, ClosedForm::Value(Rational::from_integer((-1).into())));
    let m = TowerMonomial::parse(&shape, "t1_1^2 d2_1").unwrap();
    assert_eq!(pair_monomial(&shape, &m).unwrap(), Rational::from_integer((-1).into()));
}
