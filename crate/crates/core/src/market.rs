//! Skill demand extracted from job vacancies, and the job -> skills index.
//!
//! File formats (all UTF-8 JSON):
//! - vacancies: a directory of `*.json` files (one vacancy object or an array
//!   of them) and/or `*.jsonl` files (one vacancy object per line), each with
//!   `id, job_title, country, city, posted_date (YYYY-MM-DD), body`;
//! - lexicon: an array of `{ id, name, aliases: [..], description? }`;
//! - descriptions: an object mapping skill id to description text;
//! - index: the serialized [`MarketIndex`].

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil::read_json;

pub const DEFAULT_TOP_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vacancy {
    pub id: String,
    pub job_title: String,
    #[serde(default)]
    pub country: String,
    #[serde(default)]
    pub city: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posted_date: Option<NaiveDate>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillLexiconEntry {
    pub id: String,
    pub name: String,
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl SkillLexiconEntry {
    pub fn validate(&self) -> Result<()> {
        if self.aliases.is_empty() {
            return Err(Error::validation("lexicon", format!("skill `{}` has no aliases", self.id)));
        }
        if let Some(a) = self.aliases.iter().find(|a| a.trim().is_empty()) {
            return Err(Error::validation("lexicon", format!("skill `{}` has empty alias `{a}`", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillDemand {
    pub skill: String,
    pub name: String,
    pub vacancy_count: usize,
    pub rank: usize,
}

/// Lowercases and collapses runs of whitespace to one space.
fn fold(text: &str) -> String {
    text.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

/// True when `phrase` occurs in `text` with no alphanumeric character directly
/// before or after it. Both arguments must already be folded.
fn contains_phrase(text: &str, phrase: &str) -> bool {
    if phrase.is_empty() {
        return false;
    }
    let mut from = 0;
    while let Some(off) = text[from..].find(phrase) {
        let start = from + off;
        let end = start + phrase.len();
        let before_ok = text[..start].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
        let after_ok = text[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return true;
        }
        from = start + text[start..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

/// Document frequency of each lexicon skill over the vacancies, ranked by count
/// (descending) then canonical name. Skills that never occur are omitted.
pub fn extract_skills(vacancies: &[Vacancy], lexicon: &[SkillLexiconEntry], top_n: usize) -> Vec<SkillDemand> {
    let bodies: Vec<String> = vacancies.iter().map(|v| fold(&v.body)).collect();
    let mut counts: Vec<(&SkillLexiconEntry, usize)> = lexicon
        .iter()
        .map(|entry| {
            let aliases: Vec<String> = entry.aliases.iter().map(|a| fold(a)).collect();
            let n = bodies.iter().filter(|b| aliases.iter().any(|a| contains_phrase(b, a))).count();
            (entry, n)
        })
        .filter(|(_, n)| *n > 0)
        .collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.name.cmp(&b.0.name)).then_with(|| a.0.id.cmp(&b.0.id)));
    counts
        .into_iter()
        .take(top_n)
        .enumerate()
        .map(|(i, (e, n))| SkillDemand { skill: e.id.clone(), name: e.name.clone(), vacancy_count: n, rank: i + 1 })
        .collect()
}

/// Lowercase, punctuation stripped, whitespace collapsed.
pub fn normalize_job_title(title: &str) -> String {
    let cleaned: String =
        title.chars().map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' }).collect();
    fold(&cleaned)
}

fn normalize_place(s: &str) -> String {
    fold(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandEntry {
    /// Normalized job title.
    pub job: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub city: Option<String>,
    pub vacancy_count: usize,
    pub skills: Vec<SkillDemand>,
}

type DemandKey = (String, Option<String>, Option<String>);

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MarketIndex {
    pub lexicon: Vec<SkillLexiconEntry>,
    pub descriptions: BTreeMap<String, String>,
    pub demand: Vec<DemandEntry>,
    #[serde(skip)]
    lookup: HashMap<DemandKey, usize>,
}

impl MarketIndex {
    /// Builds demand lists at job, job+country and job+country+city granularity.
    pub fn build(
        vacancies: &[Vacancy],
        lexicon: Vec<SkillLexiconEntry>,
        mut descriptions: BTreeMap<String, String>,
        top_n: usize,
    ) -> Result<Self> {
        if lexicon.is_empty() {
            return Err(Error::validation("lexicon", "empty lexicon"));
        }
        for e in &lexicon {
            e.validate()?;
            if let Some(d) = &e.description {
                descriptions.entry(e.id.clone()).or_insert_with(|| d.clone());
            }
        }
        for v in vacancies {
            if v.body.trim().is_empty() {
                return Err(Error::validation("vacancy", format!("vacancy `{}` has an empty body", v.id)));
            }
        }
        let mut groups: BTreeMap<DemandKey, Vec<Vacancy>> = BTreeMap::new();
        for v in vacancies {
            let job = normalize_job_title(&v.job_title);
            let country = Some(normalize_place(&v.country)).filter(|s| !s.is_empty());
            let city = Some(normalize_place(&v.city)).filter(|s| !s.is_empty());
            groups.entry((job.clone(), None, None)).or_default().push(v.clone());
            if let Some(country) = &country {
                groups.entry((job.clone(), Some(country.clone()), None)).or_default().push(v.clone());
                if let Some(city) = &city {
                    groups.entry((job, Some(country.clone()), Some(city.clone()))).or_default().push(v.clone());
                }
            }
        }
        let demand = groups
            .into_iter()
            .map(|((job, country, city), vs)| DemandEntry {
                job,
                country,
                city,
                vacancy_count: vs.len(),
                skills: extract_skills(&vs, &lexicon, top_n),
            })
            .collect();
        let mut index = MarketIndex { lexicon, descriptions, demand, lookup: HashMap::new() };
        index.reindex();
        Ok(index)
    }

    fn reindex(&mut self) {
        self.lookup = self
            .demand
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.job.clone(), e.country.clone(), e.city.clone()), i))
            .collect();
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindexed(mut self) -> Self {
        self.reindex();
        self
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json::<MarketIndex>(path).map(MarketIndex::reindexed)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::fsutil::write_json_atomic(path, self)
    }

    /// Demand list for the narrowest known key: job+country+city, then
    /// job+country, then job alone.
    pub fn required_skills_for_job(
        &self,
        job_title: &str,
        country: Option<&str>,
        city: Option<&str>,
    ) -> Result<&DemandEntry> {
        let job = normalize_job_title(job_title);
        let country = country.map(normalize_place).filter(|s| !s.is_empty());
        let city = city.map(normalize_place).filter(|s| !s.is_empty());
        let mut keys: Vec<DemandKey> = Vec::with_capacity(3);
        if let (Some(co), Some(ci)) = (&country, &city) {
            keys.push((job.clone(), Some(co.clone()), Some(ci.clone())));
        }
        if let Some(co) = &country {
            keys.push((job.clone(), Some(co.clone()), None));
        }
        keys.push((job.clone(), None, None));
        keys.iter()
            .find_map(|k| self.lookup.get(k))
            .map(|&i| &self.demand[i])
            .ok_or(Error::NotFound { kind: "job", id: job_title.to_string() })
    }

    pub fn skill(&self, id: &str) -> Option<&SkillLexiconEntry> {
        self.lexicon.iter().find(|e| e.id == id)
    }

    pub fn skill_description(&self, id: &str) -> Result<&str> {
        skill_description(id, &self.descriptions)
    }
}

/// Stored description text for a skill. Missing and blank descriptions are errors.
pub fn skill_description<'a>(id: &str, corpus: &'a BTreeMap<String, String>) -> Result<&'a str> {
    match corpus.get(id) {
        Some(d) if !d.trim().is_empty() => Ok(d),
        Some(_) => Err(Error::validation("description", format!("description of `{id}` is empty"))),
        None => Err(Error::NotFound { kind: "skill description", id: id.to_string() }),
    }
}

pub fn load_vacancies(dir: &Path) -> Result<Vec<Vacancy>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "jsonl")))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        if p.extension().and_then(|e| e.to_str()) == Some("jsonl") {
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                out.push(serde_json::from_str(line).map_err(|e| Error::json(&p, e))?);
            }
        } else {
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(&p, e))?;
            if v.is_array() {
                out.extend(serde_json::from_value::<Vec<Vacancy>>(v).map_err(|e| Error::json(&p, e))?);
            } else {
                out.push(serde_json::from_value(v).map_err(|e| Error::json(&p, e))?);
            }
        }
    }
    Ok(out)
}

pub fn load_lexicon(path: &Path) -> Result<Vec<SkillLexiconEntry>> {
    let mut lex: Vec<SkillLexiconEntry> = read_json(path)?;
    for e in &mut lex {
        e.validate()?;
        for a in &mut e.aliases {
            *a = fold(a);
        }
    }
    Ok(lex)
}

pub fn load_descriptions(path: &Path) -> Result<BTreeMap<String, String>> {
    read_json(path)
}
