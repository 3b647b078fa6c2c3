use std::path::{Path, PathBuf};

use bruhat_core::ldu::check_inverse_factors;
use bruhat_core::minors::{leading_minor, sylvester_pairs};
use bruhat_core::{
    alpha_minor, bruhat_flip, bruhat_general, check_base_minor_identity, check_sylvester, etd, ldu_full,
    measure_ldu, reconstruct_ldu, verify_bruhat, verify_etd, Integer, LduFactors, Matrix, MinorSpec,
    OpCounter, Ring,
};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::document::{FactorsDocument, Method};
use crate::matrix_file::read_matrix;
use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "bruhat",
    version,
    about = "Fraction-free LDU, Bruhat and exact triangular decompositions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Factor a matrix and print the factors document.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Etd)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Check the factors before printing them.
        #[arg(long)]
        verify: bool,
        /// Append a JSON line with operation counts.
        #[arg(long)]
        count_ops: bool,
    },
    /// Check a factors document against a matrix.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        factors: PathBuf,
    },
    /// Check minor identities on a matrix or on seeded random matrices.
    Oracle {
        #[arg(long, value_enum)]
        check: Check,
        /// Matrix file; random matrices are used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random matrices.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Size of the random matrices.
        #[arg(long, default_value_t = 5)]
        size: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ldu,
    /// Bruhat decomposition through the exact triangular decomposition.
    Bruhat,
    /// Bruhat decomposition through the LDU of the row-reversed matrix;
    /// needs nonzero leading minors there.
    BruhatFlip,
    Etd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Txt,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Sylvester,
    Minors,
    BaseIdentity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    ParseError = 1,
    ZeroPivot = 2,
    VerifyFailed = 3,
    Violation = 4,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// What a command prints and how it exits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            status: Status::Ok,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &CliError) -> Self {
        Self {
            status: e.status(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Decompose {
            input,
            method,
            format,
            verify,
            count_ops,
        } => decompose(input, *method, *format, *verify, *count_ops),
        Command::Verify { input, factors } => verify(input, factors),
        Command::Oracle {
            check,
            input,
            k,
            s,
            seed,
            count,
            size,
        } => oracle(*check, input.as_deref(), *k, *s, *seed, *count, *size),
    };
    result.unwrap_or_else(|e| Outcome::error(&e))
}

/// Operation counts appended by `--count-ops`. The LDU fields come from
/// the instrumented recursion; the other methods report raw counter totals.
#[derive(Serialize, Debug)]
struct OpsLine {
    mul_count: u64,
    div_count: u64,
    block_products: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ring_muls_in_blocks: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_case_muls: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measured_total: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_t: Option<u64>,
}

impl OpsLine {
    fn from_counter(c: &OpCounter) -> Self {
        Self {
            mul_count: c.mul_count,
            div_count: c.div_count,
            block_products: c.block_product_count,
            ring_muls_in_blocks: None,
            base_case_muls: None,
            measured_total: None,
            expected_t: None,
        }
    }
}

fn ldu_is_valid(a: &Matrix<Integer>, f: &LduFactors<Integer>) -> bool {
    reconstruct_ldu(f) == a.to_fractions() && check_inverse_factors(f)
}

pub fn decompose(
    input: &Path,
    method: MethodArg,
    format: Format,
    check: bool,
    count_ops: bool,
) -> Result<Outcome, CliError> {
    let a = read_matrix(input)?;
    let mut counter = OpCounter::new();
    let (doc, valid) = match method {
        MethodArg::Ldu => {
            let f = ldu_full(&a, &mut counter)?;
            (FactorsDocument::from_ldu(&f), !check || ldu_is_valid(&a, &f))
        }
        MethodArg::Bruhat | MethodArg::BruhatFlip => {
            let f = if method == MethodArg::Bruhat {
                bruhat_general(&a, &mut counter)?
            } else {
                bruhat_flip(&a, &mut counter)?
            };
            (FactorsDocument::from_bruhat(&f), !check || verify_bruhat(&a, &f)?)
        }
        MethodArg::Etd => {
            let f = etd(&a, &mut counter)?;
            (FactorsDocument::from_etd(&f), !check || verify_etd(&a, &f)?)
        }
    };
    if !valid {
        return Err(CliError::Invalid(
            "computed factors do not reproduce the input".into(),
        ));
    }
    let mut out = match format {
        Format::Json => serde_json::to_string_pretty(&doc)? + "\n",
        Format::Txt => doc.to_text(),
    };
    if count_ops {
        let mut line = OpsLine::from_counter(&counter);
        if method == MethodArg::Ldu {
            let r = measure_ldu(&a)?;
            line.ring_muls_in_blocks = Some(r.ring_muls_in_blocks);
            line.base_case_muls = Some(r.base_case_muls);
            line.measured_total = Some(r.measured_total());
            line.expected_t = r.expected_t;
        }
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    Ok(Outcome::ok(out))
}

pub fn verify(input: &Path, factors: &Path) -> Result<Outcome, CliError> {
    let a = read_matrix(input)?;
    let text =
        std::fs::read_to_string(factors).map_err(|e| CliError::Io(factors.display().to_string(), e))?;
    let doc: FactorsDocument = serde_json::from_str(&text)?;
    let valid = match doc.method {
        Method::Etd => verify_etd(&a, &doc.to_etd()?)?,
        Method::Bruhat => verify_bruhat(&a, &doc.to_bruhat()?)?,
        Method::Ldu => verify_ldu_document(&a, &doc)?,
    };
    if !valid {
        return Err(CliError::Invalid(
            "factors do not satisfy the decomposition".into(),
        ));
    }
    Ok(Outcome::ok("ok\n".into()))
}

fn verify_ldu_document(a: &Matrix<Integer>, doc: &FactorsDocument) -> Result<bool, CliError> {
    let (l, u, alphas) = doc.to_ldu_parts()?;
    let n = a.rows();
    if !a.is_square() || l.shape() != (n, n) || u.shape() != (n, n) || alphas.len() != n {
        return Err(CliError::Core(bruhat_core::Error::DimensionMismatch(format!(
            "LDU factors of size {}x{} against a {}x{} matrix",
            l.rows(),
            l.cols(),
            a.rows(),
            a.cols()
        ))));
    }
    let diagonal_ok =
        (0..n).all(|i| l[(i, i)] == alphas[i] && u[(i, i)] == alphas[i] && !alphas[i].is_zero());
    if doc.rank != n || !diagonal_ok || !l.is_lower_triangular() || !u.is_upper_triangular() {
        return Ok(false);
    }
    let f = LduFactors {
        l,
        u,
        alphas,
        m: Matrix::zeros(0, 0),
        w: Matrix::zeros(0, 0),
        k: 0,
        alpha_k: Integer::one(),
    };
    Ok(reconstruct_ldu(&f) == a.to_fractions())
}

#[derive(Serialize, Debug, Default)]
struct Witness {
    matrix: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    factor: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<usize>,
}

#[derive(Serialize, Debug)]
struct OracleReport {
    check: &'static str,
    matrices: usize,
    cases: usize,
    ok: bool,
    violations: Vec<Witness>,
}

fn random_matrices(seed: u64, count: usize, size: usize, generic: bool) -> Vec<Matrix<Integer>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = Matrix::from_fn(size, size, |_, _| Integer::from(rng.gen_range(-9i64..=9)));
        if !generic || (1..=size).all(|k| !leading_minor(&a, k).expect("in range").is_zero()) {
            out.push(a);
        }
    }
    out
}

/// `(k, s)` pairs to test: the given pair, or every valid pair.
fn pairs(n: usize, k: Option<usize>, s: Option<usize>) -> Result<Vec<(usize, usize)>, CliError> {
    let all = sylvester_pairs(n);
    let chosen: Vec<_> = all
        .into_iter()
        .filter(|&(pk, ps)| k.is_none_or(|k| k == pk) && s.is_none_or(|s| s == ps))
        .collect();
    if let (Some(k), Some(s)) = (k, s) {
        if k >= s || s > n {
            return Err(CliError::Parse(format!("need k < s <= {n}, got k={k}, s={s}")));
        }
    }
    if chosen.is_empty() {
        return Err(CliError::Parse(format!("no (k, s) pair matches for n={n}")));
    }
    Ok(chosen)
}

pub fn oracle(
    check: Check,
    input: Option<&Path>,
    k: Option<usize>,
    s: Option<usize>,
    seed: u64,
    count: usize,
    size: usize,
) -> Result<Outcome, CliError> {
    let matrices = match input {
        Some(path) => vec![read_matrix(path)?],
        None => random_matrices(seed, count, size, check == Check::Minors),
    };
    let mut cases = 0;
    let mut violations = Vec::new();
    for (idx, a) in matrices.iter().enumerate() {
        if !a.is_square() || a.rows() == 0 {
            return Err(CliError::Parse(format!(
                "oracle checks need a nonempty square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        match check {
            Check::Sylvester => {
                for (pk, ps) in pairs(n, k, s)? {
                    cases += 1;
                    if !check_sylvester(a, pk, ps)? {
                        violations.push(Witness {
                            matrix: idx,
                            k: Some(pk),
                            s: Some(ps),
                            ..Default::default()
                        });
                    }
                }
            }
            Check::BaseIdentity => {
                for (pk, ps) in pairs(n, k, s)? {
                    for i in 0..n {
                        for j in 0..n {
                            cases += 1;
                            if !check_base_minor_identity(a, i, j, pk, ps)? {
                                violations.push(Witness {
                                    matrix: idx,
                                    i: Some(i),
                                    j: Some(j),
                                    k: Some(pk),
                                    s: Some(ps),
                                    ..Default::default()
                                });
                            }
                        }
                    }
                }
            }
            Check::Minors => {
                let f = ldu_full(a, &mut OpCounter::new())?;
                for i in 0..n {
                    cases += 1;
                    if f.alphas[i] != leading_minor(a, i + 1)? {
                        violations.push(Witness {
                            matrix: idx,
                            factor: Some("alpha"),
                            i: Some(i),
                            ..Default::default()
                        });
                    }
                    for j in 0..=i {
                        cases += 2;
                        if f.l[(i, j)] != alpha_minor(a, MinorSpec::new(j + 1, i, j))? {
                            violations.push(Witness {
                                matrix: idx,
                                factor: Some("L"),
                                i: Some(i),
                                j: Some(j),
                                ..Default::default()
                            });
                        }
                        if f.u[(j, i)] != alpha_minor(a, MinorSpec::new(j + 1, j, i))? {
                            violations.push(Witness {
                                matrix: idx,
                                factor: Some("U"),
                                i: Some(j),
                                j: Some(i),
                                ..Default::default()
                            });
                        }
                    }
                }
            }
        }
    }
    let report = OracleReport {
        check: match check {
            Check::Sylvester => "sylvester",
            Check::Minors => "minors",
            Check::BaseIdentity => "base-identity",
        },
        matrices: matrices.len(),
        cases,
        ok: violations.is_empty(),
        violations,
    };
    let status = if report.ok { Status::Ok } else { Status::Violation };
    Ok(Outcome {
        status,
        stdout: serde_json::to_string_pretty(&report)? + "\n",
        stderr: String::new(),
    })
}
