//! The acceptance matrix: eight criteria over the documented parameter grid.
//!
//! Fixtures are built once (in parallel) and shared by the criteria. Every
//! criterion returns its verdict, human-readable details and the relation
//! reports it produced; criterion 8 re-checks and perturbs those reports.

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::exactq::{int, rat, Lattice, Rational};
use crate::families::{
    charlier_dual_image, class1_documented, class1_example, discrete_freud, predicted_image,
    qfreud, qfreud_documented, table1_family, Class1Data, Family, FamilyParams, FamilyTag,
    QFreudData,
};
use crate::functional::{
    apply_delta, delta_of_product, hankel_check, multiply, reduce_pair, MomentFunctional,
    OrthoSequence, PearsonPair,
};
use crate::latticepoly::Poly;
use crate::relations::{
    characterization, diagonal_search, diff_sequence, verify_class1, verify_classical_trio,
    verify_first_structure, verify_qfreud_second, verify_second_structure_classical, verify_thm34,
    verify_uniform, RelationReport,
};

/// q values of the grid; the uniform lattice is run separately.
pub const Q_GRID: [(i64, i64); 3] = [(1, 2), (2, 3), (3, 2)];

pub const FAMILY_N: usize = 11;
pub const FREUD_N: usize = 12;
pub const CLASS1_N: usize = 10;
/// Diagonal search with tmax = 3, sigmamax = 5 needs N ≥ 12.
pub const CLASS1_SEARCH_N: usize = 12;
pub const UNIFORM_N: usize = 10;
pub const PRODUCT_RULE_INSTANCES: usize = 50;

pub fn q_grid() -> Vec<Rational> {
    Q_GRID.iter().map(|&(n, d)| rat(n, d)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Labeled {
    pub label: String,
    pub report: RelationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: String,
    pub pass: bool,
    pub details: Vec<String>,
    #[serde(skip)]
    pub reports: Vec<Labeled>,
}

impl CriterionResult {
    fn new(id: usize, title: &str) -> Self {
        CriterionResult {
            id,
            title: title.to_string(),
            pass: true,
            details: Vec::new(),
            reports: Vec::new(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} criterion {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title
        )
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.details.push(format!("failed: {}", what.into()));
        }
    }

    fn detail(&mut self, s: impl Into<String>) {
        self.details.push(s.into());
    }

    fn report(&mut self, label: impl Into<String>, r: RelationReport) {
        let label = label.into();
        if !r.pass {
            let w = r
                .witness
                .as_ref()
                .map(|w| format!("{} at n={}, nu={}", w.check, w.n, w.nu))
                .unwrap_or_default();
            self.check(false, format!("{label} {}: {w}", r.relation));
        }
        self.reports.push(Labeled { label, report: r });
    }

    fn error(&mut self, label: &str, e: crate::Error) {
        self.check(false, format!("{label}: {e}"));
    }
}

pub struct FamilyFixture {
    pub tag: FamilyTag,
    pub q: Rational,
    pub family: Family,
}

impl FamilyFixture {
    pub fn label(&self) -> String {
        format!("{} q={}", self.tag, self.q)
    }
}

/// Everything the criteria run on.
pub struct Fixtures {
    pub families: Vec<FamilyFixture>,
    pub freud: Vec<QFreudData>,
    pub class1: Vec<Class1Data>,
    pub class1_wide: Vec<Class1Data>,
    pub uniform: (OrthoSequence, PearsonPair),
}

impl Fixtures {
    pub fn build() -> Result<Self> {
        let grid: Vec<(FamilyTag, Rational)> = FamilyTag::ALL
            .iter()
            .flat_map(|&t| q_grid().into_iter().map(move |q| (t, q)))
            .collect();
        let families = grid
            .into_par_iter()
            .map(|(tag, q)| {
                let lat = Lattice::new(q.clone(), Rational::zero())?;
                let family = table1_family(tag, &FamilyParams::documented(tag), &lat, FAMILY_N)?;
                Ok(FamilyFixture { tag, q, family })
            })
            .collect::<Result<Vec<_>>>()?;
        let freud = qfreud_documented()
            .into_par_iter()
            .map(|(c1, c2, k, q)| qfreud(&c1, &c2, &k, &q, FREUD_N))
            .collect::<Result<Vec<_>>>()?;
        let class1 = class1_documented()
            .into_par_iter()
            .map(|(psi, m1, lat)| class1_example(&psi, &m1, &lat, CLASS1_N))
            .collect::<Result<Vec<_>>>()?;
        let class1_wide = class1_documented()
            .into_par_iter()
            .map(|(psi, m1, lat)| class1_example(&psi, &m1, &lat, CLASS1_SEARCH_N))
            .collect::<Result<Vec<_>>>()?;
        Ok(Fixtures {
            families,
            freud,
            class1,
            class1_wide,
            uniform: discrete_freud(UNIFORM_N)?,
        })
    }
}

fn freud_label(d: &QFreudData) -> String {
    format!("q-Freud c1={} c2={} K={} q={}", d.c[1], d.c[2], d.k, d.q())
}

fn class1_label(d: &Class1Data) -> String {
    format!("class-1 Psi=[{}] m1={} {}", d.psi, d.m1, d.lattice())
}

fn merge(mut into: CriterionResult, parts: Vec<CriterionResult>) -> CriterionResult {
    for p in parts {
        into.pass &= p.pass;
        into.details.extend(p.details);
        into.reports.extend(p.reports);
    }
    into
}

/// Criterion 1: the q-classical trio with tabulated coefficients for 2 ≤ n ≤ 10.
pub fn criterion_trio(fx: &Fixtures) -> CriterionResult {
    let parts = fx
        .families
        .par_iter()
        .map(|f| {
            let mut c = CriterionResult::new(1, "");
            match verify_classical_trio(&f.family.seq, &f.family.row) {
                Ok(r) => {
                    for note in &r.notes {
                        c.detail(format!("{}: {note}", f.label()));
                    }
                    c.report(f.label(), r);
                }
                Err(e) => c.error(&f.label(), e),
            }
            c
        })
        .collect();
    let mut c = merge(
        CriterionResult::new(1, "q-classical trio for the four tabulated families"),
        parts,
    );
    c.detail(format!(
        "{} family/q combinations, N = {FAMILY_N}",
        fx.families.len()
    ));
    c
}

/// Criterion 2: monic B^{[1]}_n against the family identifications for n ≤ 9.
pub fn criterion_images(fx: &Fixtures) -> CriterionResult {
    let parts = fx
        .families
        .par_iter()
        .map(|f| {
            let mut c = CriterionResult::new(2, "");
            let run = || -> Result<Vec<(usize, &'static str)>> {
                let d = diff_sequence(&f.family.seq)?;
                let mut bad = Vec::new();
                for n in 0..=9usize.min(d.len() - 1) {
                    if d[n] != predicted_image(&f.family.row, n)? {
                        bad.push((n, "image"));
                    }
                    if f.tag == FamilyTag::QCharlier {
                        let dual = f
                            .family
                            .seq
                            .poly(n + 1)
                            .hahn_apply_dual(&f.family.row.lat)?
                            .monic();
                        if dual != charlier_dual_image(&f.family.row, n)? {
                            bad.push((n, "dual image"));
                        }
                    }
                }
                Ok(bad)
            };
            match run() {
                Ok(bad) => c.check(bad.is_empty(), format!("{}: {bad:?}", f.label())),
                Err(e) => c.error(&f.label(), e),
            }
            c
        })
        .collect();
    merge(
        CriterionResult::new(2, "difference images match the family identifications"),
        parts,
    )
}

/// Criterion 3: B_n = Σ θ_{n,ν}B^{[1]}_ν, and the main characterization at σ = 0 gives the same table.
pub fn criterion_second_structure(fx: &Fixtures) -> CriterionResult {
    let parts = fx
        .families
        .par_iter()
        .map(|f| {
            let mut c = CriterionResult::new(3, "");
            let label = f.label();
            let seq = &f.family.seq;
            let run = |c: &mut CriterionResult| -> Result<()> {
                let t = f.family.pearson.t();
                let ss = verify_second_structure_classical(seq, t)?;
                let th = verify_thm34(seq, &f.family.pearson)?;
                let mut same = true;
                let mut compared = 0;
                for n in th.range[0].max(0) as usize..=th.range[1].max(0) as usize {
                    if th.range[1] < th.range[0] {
                        break;
                    }
                    for nu in 0..=n {
                        compared += 1;
                        if th.coef("varsigma", n, nu) != ss.coef("theta", n, nu) {
                            same = false;
                        }
                    }
                    same &= th.coef("xi", n, n) == Rational::one();
                }
                c.check(
                    same && compared > 0,
                    format!("{label}: main characterization table differs from the second structure table"),
                );
                c.report(label.clone(), ss);
                c.report(label.clone(), th);
                Ok(())
            };
            if let Err(e) = run(&mut c) {
                c.error(&label, e);
            }
            c
        })
        .collect();
    merge(
        CriterionResult::new(
            3,
            "second structure relation and its collapse from the main characterization",
        ),
        parts,
    )
}

/// Criterion 4: the q-Freud sequence for the documented triples.
pub fn criterion_qfreud(fx: &Fixtures) -> CriterionResult {
    let parts = fx
        .freud
        .par_iter()
        .map(|d| {
            let mut c = CriterionResult::new(4, "");
            let label = freud_label(d);
            let run = |c: &mut CriterionResult| -> Result<()> {
                c.report(label.clone(), verify_qfreud_second(d)?);
                c.report(
                    label.clone(),
                    verify_first_structure(&d.seq, &Poly::one(), 2)?,
                );
                let (_, class) = reduce_pair(&d.pearson(), d.seq.functional(), 2 * FREUD_N)?;
                c.check(class == 2, format!("{label}: reduce_pair class {class}"));
                c.detail(format!(
                    "{label}: moment relation {}",
                    if d.moment_relation_holds() {
                        "holds"
                    } else {
                        "does not hold (reported only)"
                    }
                ));
                Ok(())
            };
            if let Err(e) = run(&mut c) {
                c.error(&label, e);
            }
            c
        })
        .collect();
    merge(
        CriterionResult::new(4, "q-Freud defining relation, recurrences and class 2"),
        parts,
    )
}

/// Criterion 5: the class-one example.
pub fn criterion_class1(fx: &Fixtures) -> CriterionResult {
    let parts = fx
        .class1
        .par_iter()
        .zip(&fx.class1_wide)
        .map(|(d, wide)| {
            let mut c = CriterionResult::new(5, "");
            let label = class1_label(d);
            let run = |c: &mut CriterionResult| -> Result<()> {
                c.report(label.clone(), verify_class1(d)?);
                let found = diagonal_search(&wide.seq, 3, 5)?;
                c.check(
                    found.is_empty(),
                    format!("{label}: diagonal candidates {found:?}"),
                );
                let (_, class) = reduce_pair(&d.pearson(), d.seq.functional(), 2 * CLASS1_N)?;
                c.check(class == 1, format!("{label}: reduce_pair class {class}"));
                c.detail(format!(
                    "{label}: C = {}, gamma_1 = {}, beta_0 = {}",
                    d.c,
                    d.seq.gamma()[1],
                    d.seq.beta()[0]
                ));
                Ok(())
            };
            if let Err(e) = run(&mut c) {
                c.error(&label, e);
            }
            c
        })
        .collect();
    merge(
        CriterionResult::new(5, "class-one example, non-diagonality and class 1"),
        parts,
    )
}

/// Criterion 6: band relations, second-difference relation and both characterizations on every fixture.
pub fn criterion_characterization(fx: &Fixtures) -> CriterionResult {
    let mut jobs: Vec<(String, &OrthoSequence, PearsonPair)> = Vec::new();
    for f in &fx.families {
        jobs.push((f.label(), &f.family.seq, f.family.pearson.clone()));
    }
    for d in &fx.class1 {
        jobs.push((class1_label(d), &d.seq, d.pearson()));
    }
    for d in &fx.freud {
        jobs.push((freud_label(d), &d.seq, d.pearson()));
    }
    let parts = jobs
        .par_iter()
        .map(|(label, seq, pp)| {
            let mut c = CriterionResult::new(6, "");
            match characterization(seq, pp) {
                Ok(rs) => rs.into_iter().for_each(|r| c.report(label.clone(), r)),
                Err(e) => c.error(label, e),
            }
            c
        })
        .collect();
    merge(
        CriterionResult::new(
            6,
            "characterization suite on families, class-one and q-Freud",
        ),
        parts,
    )
}

/// Criterion 7: the same suite on the uniform lattice.
pub fn criterion_uniform(fx: &Fixtures) -> CriterionResult {
    let mut c = CriterionResult::new(7, "characterization suite on the uniform lattice");
    let (seq, pp) = &fx.uniform;
    let label = "discrete Freud (uniform)";
    match verify_uniform(seq, pp) {
        Ok(rs) => rs.into_iter().for_each(|r| c.report(label, r)),
        Err(e) => c.error(label, e),
    }
    let brackets_are_integers =
        (0..=UNIFORM_N).all(|n| crate::exactq::qbracket(n, seq.lattice()) == int(n as i64));
    c.check(brackets_are_integers, "[n] = n on the uniform lattice");
    c
}

fn random_rational(rng: &mut StdRng) -> Rational {
    rat(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

fn random_lattice(rng: &mut StdRng) -> Lattice {
    let qs = q_grid();
    let omegas = [int(0), rat(1, 3), int(1)];
    if rng.gen_range(0..4) == 0 {
        return Lattice::uniform();
    }
    let q = qs[rng.gen_range(0..qs.len())].clone();
    let w = omegas[rng.gen_range(0..omegas.len())].clone();
    Lattice::new(q, w).expect("grid lattices are valid")
}

/// Product rule two-path check on one random instance: Δ(gu) = hΔu + Δh·u, h = g(s−1).
pub fn product_rule_instance(rng: &mut StdRng) -> Result<bool> {
    let lat = random_lattice(rng);
    let deg = rng.gen_range(0..=4);
    let g = Poly::new((0..=deg).map(|_| random_rational(rng)).collect());
    let mut m: Vec<Rational> = (0..14).map(|_| random_rational(rng)).collect();
    if m[0].is_zero() {
        m[0] = Rational::one();
    }
    let u = MomentFunctional::new(m, lat)?;
    let a = apply_delta(&multiply(&u, &g)?)?;
    let b = delta_of_product(&g, &u)?;
    Ok(a.moments() == b.moments())
}

fn favard_holds(seq: &OrthoSequence) -> bool {
    OrthoSequence::from_recurrence(seq.beta(), seq.gamma()) == seq.polys()
}

fn hankel_ratio_holds(seq: &OrthoSequence, upto: usize) -> Result<bool> {
    let dets = hankel_check(seq.functional(), upto)?;
    Ok((1..=upto).all(|n| {
        let prev2 = if n >= 2 {
            dets[n - 2].clone()
        } else {
            Rational::one()
        };
        let prev = &dets[n - 1];
        seq.gamma()[n] == &dets[n] * prev2 / (prev * prev)
    }))
}

/// Criterion 8: product rule, Favard, Hankel ratios, and recheck/perturbation of `reports`.
pub fn criterion_infrastructure(fx: &Fixtures, reports: &[Labeled]) -> CriterionResult {
    let mut c = CriterionResult::new(8, "infrastructure oracles and perturbation sensitivity");
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut product_rule_ok = 0;
    for _ in 0..PRODUCT_RULE_INSTANCES {
        match product_rule_instance(&mut rng) {
            Ok(true) => product_rule_ok += 1,
            Ok(false) => {}
            Err(e) => c.error("product rule", e),
        }
    }
    c.check(
        product_rule_ok == PRODUCT_RULE_INSTANCES,
        format!("product rule {product_rule_ok}/{PRODUCT_RULE_INSTANCES}"),
    );
    let mut seqs: Vec<(String, &OrthoSequence)> = fx
        .families
        .iter()
        .map(|f| (f.label(), &f.family.seq))
        .collect();
    seqs.extend(fx.class1.iter().map(|d| (class1_label(d), &d.seq)));
    seqs.extend(fx.freud.iter().map(|d| (freud_label(d), &d.seq)));
    seqs.push(("discrete Freud (uniform)".into(), &fx.uniform.0));
    for (label, seq) in &seqs {
        c.check(favard_holds(seq), format!("{label}: Favard round trip"));
        match hankel_ratio_holds(seq, 8) {
            Ok(ok) => c.check(ok, format!("{label}: Hankel ratio")),
            Err(e) => c.error(label, e),
        }
    }
    let bad: Vec<String> = reports
        .par_iter()
        .filter(|l| l.report.pass)
        .filter(|l| l.report.recheck().is_some() || !l.report.perturbation_sensitive())
        .map(|l| format!("{} {}", l.label, l.report.relation))
        .collect();
    c.check(
        bad.is_empty(),
        format!("not perturbation sensitive: {bad:?}"),
    );
    c.detail(format!(
        "product rule {product_rule_ok}/{PRODUCT_RULE_INSTANCES}; {} sequences; {} passing reports rechecked and perturbed",
        seqs.len(),
        reports.iter().filter(|l| l.report.pass).count()
    ));
    c
}

/// All eight criteria in order.
pub fn run_all() -> Result<Vec<CriterionResult>> {
    let fx = Fixtures::build()?;
    let runs: [fn(&Fixtures) -> CriterionResult; 7] = [
        criterion_trio,
        criterion_images,
        criterion_second_structure,
        criterion_qfreud,
        criterion_class1,
        criterion_characterization,
        criterion_uniform,
    ];
    let mut out: Vec<CriterionResult> = runs.par_iter().map(|f| f(&fx)).collect();
    let all: Vec<Labeled> = out.iter().flat_map(|c| c.reports.clone()).collect();
    out.push(criterion_infrastructure(&fx, &all));
    Ok(out)
}
