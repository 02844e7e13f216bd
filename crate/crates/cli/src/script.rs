//! Scripted oracle sessions: one JSON query per line in, one JSON answer per
//! line out, plus the session transcript.
//!
//! ```text
//! {"kind":"VSTAT","h":{"contains":{"literal":-3}}}
//! {"kind":"1-MSTAT","h":{"negation_pattern":{"positions":[0,2]}}}
//! {"kind":"MVSTAT","h":{"negation_pattern":{"positions":[0,1]}},"sets":[[0],[1,2]]}
//! ```

use plantedcsp::oracle::{uniform_clause_support, ClauseStream, OracleSession, SubsetSpec};
use plantedcsp::solver::sample_rng;
use plantedcsp::{Assignment, Error, Literal, PlantedModel, Result, Source};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest clause domain listed for exact expectations.
pub const SCRIPT_ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScriptKind {
    #[serde(rename = "1-STAT")]
    OneStat,
    #[serde(rename = "1-MSTAT")]
    OneMstat,
    #[serde(rename = "VSTAT")]
    Vstat,
    #[serde(rename = "MVSTAT")]
    Mvstat,
}

/// Query functions on clauses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum QueryFn {
    /// 1 iff the clause contains the DIMACS literal.
    Contains { literal: i64 },
    /// Parity of the negations at the given positions.
    NegationParity { positions: Vec<usize> },
    /// 1 iff the literal at `position` is the DIMACS literal.
    LiteralAt { position: usize, literal: i64 },
    /// Negations at the given positions as a bitmask; range `2^len`.
    NegationPattern { positions: Vec<usize> },
}

impl QueryFn {
    pub fn range(&self) -> usize {
        match self {
            QueryFn::NegationPattern { positions } => 1 << positions.len(),
            _ => 2,
        }
    }

    fn validate(&self, k: usize) -> Result<()> {
        let bad_pos = |p: &[usize]| p.iter().any(|&i| i >= k);
        let bad = match self {
            QueryFn::Contains { literal } => Literal::from_dimacs(*literal).is_none(),
            QueryFn::LiteralAt { position, literal } => {
                *position >= k || Literal::from_dimacs(*literal).is_none()
            }
            QueryFn::NegationParity { positions } => bad_pos(positions),
            QueryFn::NegationPattern { positions } => bad_pos(positions) || positions.len() > 16,
        };
        if bad {
            return Err(Error::Config(format!(
                "query {self:?} does not fit arity {k}"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, clause: &[Literal]) -> usize {
        match self {
            QueryFn::Contains { literal } => {
                usize::from(clause.iter().any(|l| l.to_dimacs() == *literal))
            }
            QueryFn::LiteralAt { position, literal } => {
                usize::from(clause[*position].to_dimacs() == *literal)
            }
            QueryFn::NegationParity { positions } => {
                positions
                    .iter()
                    .filter(|&&p| clause[p].is_negated())
                    .count()
                    % 2
            }
            QueryFn::NegationPattern { positions } => positions
                .iter()
                .enumerate()
                .map(|(i, &p)| usize::from(clause[p].is_negated()) << i)
                .sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptQuery {
    pub kind: ScriptKind,
    pub h: QueryFn,
    /// MVSTAT subset constraints; singletons when absent.
    #[serde(default)]
    pub sets: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScriptAnswer {
    pub index: usize,
    pub kind: ScriptKind,
    #[serde(rename = "L")]
    pub l: usize,
    pub answer: serde_json::Value,
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptQuery>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::Config(format!("script line {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ScriptRun {
    pub answers: Vec<ScriptAnswer>,
    pub transcript: String,
    pub samples: u64,
}

/// Runs `queries` against `Q_σ` on `n` variables with `σ` and the sample
/// stream drawn from `seed`. Adversarial sessions answer from the uniform
/// clause law.
pub fn run_script(
    source: &Source,
    n: usize,
    seed: u64,
    t: u64,
    adversarial: bool,
    queries: &[ScriptQuery],
) -> Result<ScriptRun> {
    let k = source.k();
    for q in queries {
        q.h.validate(k)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let model = PlantedModel::new(source.clone(), Assignment::random(n, &mut rng))?;
    if model.distribution().is_none() {
        return Err(Error::ModelMismatch(
            "scripted sessions need a clause distribution",
        ));
    }
    let stream =
        ClauseStream::new(model, sample_rng(seed))?.with_enumeration_cap(SCRIPT_ENUMERATION_CAP);
    let mut session = if adversarial {
        let reference =
            uniform_clause_support(n, k, SCRIPT_ENUMERATION_CAP).ok_or(Error::NotEnumerable)?;
        OracleSession::adversarial(stream, t, reference)
    } else {
        OracleSession::honest(stream, t)
    };
    let mut answers = Vec::with_capacity(queries.len());
    for (index, q) in queries.iter().enumerate() {
        let h = |c: &plantedcsp::clause::LiteralVec| q.h.eval(c);
        let l = q.h.range();
        let binary = |kind| {
            if l == 2 {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{kind} needs a 0/1 query at line {}",
                    index + 1
                )))
            }
        };
        let answer = match q.kind {
            ScriptKind::OneStat => {
                binary("1-STAT")?;
                serde_json::json!(session.one_stat(|c| h(c) == 1)?)
            }
            ScriptKind::OneMstat => serde_json::json!(session.one_mstat(l, h)?),
            ScriptKind::Vstat => {
                binary("VSTAT")?;
                serde_json::to_value(session.vstat(|c| h(c) == 1)?).expect("plain data")
            }
            ScriptKind::Mvstat => {
                let spec = match &q.sets {
                    Some(sets) => SubsetSpec::new(l, sets.clone())?,
                    None => SubsetSpec::singletons(l),
                };
                serde_json::json!(session.mvstat(l, h, &spec)?)
            }
        };
        answers.push(ScriptAnswer {
            index,
            kind: q.kind,
            l,
            answer,
        });
    }
    Ok(ScriptRun {
        answers,
        transcript: session.transcript_jsonl(),
        samples: session.samples_consumed(),
    })
}

pub fn answers_jsonl(answers: &[ScriptAnswer]) -> String {
    answers
        .iter()
        .map(|a| serde_json::to_string(a).expect("plain data") + "\n")
        .collect()
}
