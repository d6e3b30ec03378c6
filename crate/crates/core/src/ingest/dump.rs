//! Raw repository dumps and their mapping onto [`OerRecord`].
//!
//! A dump is a UTF-8 JSON file, either
//! - an object `{ "source": tag, "skill": id, "level": level, "records": [..] }`
//!   whose header fields are defaults for every record, or
//! - a bare array of record objects, or a `.jsonl` file with one object per line.
//!
//! When no source is given the file stem is used as the tag. Record keys are
//! matched against the alias lists in [`FieldAliases`], so each repository can
//! keep its native field names.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::embeddings::{skill_similarity, EmbeddingTable};
use crate::error::{Error, Result};
use crate::model::{ExpertiseLevel, NativeRate, OerRecord, SourceRepository};
use crate::normalize::ranking_position_score;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRepositoryRecord {
    pub source: String,
    /// 1-based position in the dump, used when the payload carries none.
    pub dump_position: usize,
    pub payload: Map<String, Value>,
}

/// Accepted key names per field, tried in order.
pub struct FieldAliases;

impl FieldAliases {
    pub const ID: &'static [&'static str] = &["id", "video_id", "videoId", "identifier", "resource_id"];
    pub const TITLE: &'static [&'static str] = &["title", "name", "page_title"];
    pub const DESCRIPTION: &'static [&'static str] = &["description", "summary", "abstract", "extract"];
    pub const URL: &'static [&'static str] = &["url", "link", "href", "permalink"];
    pub const SKILL: &'static [&'static str] = &["skill", "target_skill", "query_skill"];
    pub const LEVEL: &'static [&'static str] = &["level", "expertise_level", "difficulty"];
    pub const LENGTH: &'static [&'static str] =
        &["length", "duration", "duration_seconds", "length_seconds", "word_count"];
    pub const TRANSCRIPTION: &'static [&'static str] = &["transcription", "transcript", "captions", "text", "content"];
    pub const VIEWS: &'static [&'static str] = &["view_count", "views", "viewCount"];
    pub const STARS: &'static [&'static str] = &["stars", "rating", "average_rating"];
    pub const LIKES: &'static [&'static str] = &["likes", "like_count", "likeCount"];
    pub const DISLIKES: &'static [&'static str] = &["dislikes", "dislike_count", "dislikeCount"];
    pub const POSITION: &'static [&'static str] = &["position", "rank", "ranking_position", "search_rank"];
    pub const LANGUAGE: &'static [&'static str] = &["language", "lang", "default_language"];
}

fn field<'a>(payload: &'a Map<String, Value>, keys: &[&str]) -> Option<&'a Value> {
    keys.iter().filter_map(|k| payload.get(*k)).find(|v| !v.is_null())
}

fn text(payload: &Map<String, Value>, keys: &[&str]) -> Option<String> {
    match field(payload, keys)? {
        Value::String(s) if !s.trim().is_empty() => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn number(payload: &Map<String, Value>, keys: &[&str], name: &str) -> Result<Option<f64>> {
    let Some(v) = field(payload, keys) else { return Ok(None) };
    let parsed = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) if s.trim().is_empty() => return Ok(None),
        Value::String(s) => s.trim().parse::<f64>().ok().or_else(|| parse_iso_duration(s.trim())),
        _ => None,
    };
    match parsed {
        Some(x) if x.is_finite() => Ok(Some(x)),
        _ => Err(Error::validation(name, format!("not a number: {v}"))),
    }
}

fn count(payload: &Map<String, Value>, keys: &[&str], name: &str) -> Result<Option<u64>> {
    match number(payload, keys, name)? {
        None => Ok(None),
        Some(x) if x >= 0.0 && x.fract() == 0.0 => Ok(Some(x as u64)),
        Some(x) => Err(Error::validation(name, format!("{x} is not a non-negative integer"))),
    }
}

/// Seconds in an ISO 8601 duration such as `PT1H4M13S`.
pub fn parse_iso_duration(s: &str) -> Option<f64> {
    let rest = s.strip_prefix("PT").or_else(|| s.strip_prefix("pt"))?;
    let mut total = 0.0;
    let mut num = String::new();
    for c in rest.chars() {
        match c.to_ascii_uppercase() {
            d if d.is_ascii_digit() || d == '.' => num.push(d),
            unit @ ('H' | 'M' | 'S') => {
                let v: f64 = num.parse().ok()?;
                num.clear();
                total += v * match unit {
                    'H' => 3600.0,
                    'M' => 60.0,
                    _ => 1.0,
                };
            }
            _ => return None,
        }
    }
    num.is_empty().then_some(total)
}

/// Skill description lookup and the embedding table used for skill similarity.
pub struct SkillContext<'a> {
    pub descriptions: &'a std::collections::BTreeMap<String, String>,
    pub embeddings: &'a EmbeddingTable<f64>,
}

/// Maps one raw payload onto an unscored [`OerRecord`].
///
/// Fails for an unregistered source, a missing title, url, skill or level, and
/// malformed numeric fields.
pub fn normalize_record(raw: &RawRepositoryRecord, ctx: &SkillContext<'_>) -> Result<OerRecord> {
    let source = SourceRepository::from_tag(&raw.source)?;
    let p = &raw.payload;
    let title = text(p, FieldAliases::TITLE).ok_or_else(|| Error::validation("title", "missing"))?;
    let url = text(p, FieldAliases::URL).ok_or_else(|| Error::validation("url", "missing"))?;
    let skill = text(p, FieldAliases::SKILL).ok_or_else(|| Error::validation("skill", "missing"))?;
    let level: ExpertiseLevel =
        text(p, FieldAliases::LEVEL).ok_or_else(|| Error::validation("level", "missing"))?.parse()?;
    let id = match text(p, FieldAliases::ID) {
        Some(native) => format!("{}:{native}", source.tag()),
        None => format!("{}:{}:{}", source.tag(), skill, raw.dump_position),
    };

    let mut r = OerRecord::new(id, source, title, skill, level, url);
    r.description = text(p, FieldAliases::DESCRIPTION);
    r.language = text(p, FieldAliases::LANGUAGE);
    r.transcription = text(p, FieldAliases::TRANSCRIPTION);
    r.length = number(p, FieldAliases::LENGTH, "length")?;
    r.view_count = count(p, FieldAliases::VIEWS, "view_count")?;
    let likes = count(p, FieldAliases::LIKES, "likes")?;
    let dislikes = count(p, FieldAliases::DISLIKES, "dislikes")?;
    r.native_rate = match (number(p, FieldAliases::STARS, "stars")?, likes, dislikes) {
        (Some(stars), _, _) => Some(NativeRate::Stars { stars }),
        (None, None, None) => None,
        (None, l, d) => Some(NativeRate::LikeDislike { likes: l.unwrap_or(0), dislikes: d.unwrap_or(0) }),
    };
    let position = match count(p, FieldAliases::POSITION, "position")? {
        Some(0) => return Err(Error::validation("position", "positions are 1-based")),
        Some(n) => n,
        None => raw.dump_position as u64,
    };
    let position = u32::try_from(position).map_err(|_| Error::validation("position", "too large"))?;
    r.ranking_position = Some(position);
    r.ranking_position_score = Some(ranking_position_score(position as i64)?);
    if let Some(tr) = &r.transcription {
        if let Some(desc) = ctx.descriptions.get(&r.target_skill).filter(|d| !d.trim().is_empty()) {
            r.skill_similarity = Some(skill_similarity(tr, desc, ctx.embeddings));
        }
    }
    r.validate()?;
    Ok(r)
}

/// Reads every record of one dump file.
pub fn read_dump(path: &Path) -> Result<Vec<RawRepositoryRecord>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    let mut header = Map::new();
    let items: Vec<Value> = if path.extension().and_then(|e| e.to_str()) == Some("jsonl") {
        content
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::json(path, e)))
            .collect::<Result<_>>()?
    } else {
        match serde_json::from_str(&content).map_err(|e| Error::json(path, e))? {
            Value::Array(items) => items,
            Value::Object(mut obj) => {
                let records = match obj.remove("records") {
                    Some(Value::Array(r)) => r,
                    _ => return Err(Error::validation("dump", format!("{}: no `records` array", path.display()))),
                };
                header = obj;
                records
            }
            _ => return Err(Error::validation("dump", format!("{}: expected an object or array", path.display()))),
        }
    };
    let default_source = header.get("source").and_then(Value::as_str).map(String::from).unwrap_or(stem);
    items
        .into_iter()
        .enumerate()
        .map(|(i, item)| {
            let Value::Object(mut payload) = item else {
                return Err(Error::validation(
                    "dump",
                    format!("{}: record {} is not an object", path.display(), i + 1),
                ));
            };
            for (k, v) in &header {
                payload.entry(k.clone()).or_insert_with(|| v.clone());
            }
            let source = match payload.remove("source") {
                Some(Value::String(s)) => s,
                _ => default_source.clone(),
            };
            Ok(RawRepositoryRecord { source, dump_position: i + 1, payload })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;
    use std::collections::BTreeMap;

    fn raw(source: &str, payload: Value) -> RawRepositoryRecord {
        let Value::Object(payload) = payload else { panic!() };
        RawRepositoryRecord { source: source.into(), dump_position: 1, payload }
    }

    fn ctx_parts() -> (BTreeMap<String, String>, EmbeddingTable<f64>) {
        let mut d = BTreeMap::new();
        d.insert("sql".to_string(), "query tables".to_string());
        let t = EmbeddingTable::from_entries(2, [("query", vec![1.0, 0.0]), ("tables", vec![0.0, 1.0])]).unwrap();
        (d, t)
    }

    #[test]
    fn video_payload() {
        let (d, t) = ctx_parts();
        let ctx = SkillContext { descriptions: &d, embeddings: &t };
        let r = normalize_record(
            &raw(
                "youtube",
                json!({"videoId": "abc", "title": "SQL in 10 minutes", "link": "https://y/abc", "skill": "sql",
                       "level": "beginner", "duration": "PT4M10S", "viewCount": "1200", "likeCount": 90,
                       "dislikeCount": 10, "position": 3, "transcript": "query tables"}),
            ),
            &ctx,
        )
        .unwrap();
        assert_eq!(r.id, "youtube:abc");
        assert_eq!(r.length, Some(250.0));
        assert_eq!(r.view_count, Some(1200));
        assert_eq!(r.native_rate, Some(NativeRate::LikeDislike { likes: 90, dislikes: 10 }));
        assert_eq!(r.ranking_position_score, Some(1.0 / 3.0));
        assert!((r.skill_similarity.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absent_fields_stay_absent() {
        let (d, t) = ctx_parts();
        let ctx = SkillContext { descriptions: &d, embeddings: &t };
        let r = normalize_record(
            &raw("wikipedia", json!({"title": "SQL", "url": "https://w/sql", "skill": "sql", "level": 0})),
            &ctx,
        )
        .unwrap();
        assert_eq!(r.skill_similarity, None);
        assert_eq!(r.native_rate, None);
        assert_eq!(r.length, None);
        assert_eq!(r.ranking_position, Some(1));
    }

    #[test]
    fn rejections() {
        let (d, t) = ctx_parts();
        let ctx = SkillContext { descriptions: &d, embeddings: &t };
        let ok = json!({"title": "x", "url": "u", "skill": "sql", "level": "advanced"});
        assert!(normalize_record(&raw("coursera", ok.clone()), &ctx).is_err());
        assert!(normalize_record(&raw("khan", json!({"url": "u", "skill": "sql", "level": 1})), &ctx).is_err());
        assert!(normalize_record(&raw("khan", json!({"title": "t", "skill": "sql", "level": 1})), &ctx).is_err());
        assert!(normalize_record(
            &raw("khan", json!({"title": "t", "url": "u", "skill": "sql", "level": 1, "views": "many"})),
            &ctx
        )
        .is_err());
        assert!(normalize_record(&raw("khan", ok), &ctx).is_ok());
    }

    #[test]
    fn iso_durations() {
        assert_eq!(parse_iso_duration("PT1H2M3S"), Some(3723.0));
        assert_eq!(parse_iso_duration("PT45S"), Some(45.0));
        assert_eq!(parse_iso_duration("PT4M"), Some(240.0));
        assert_eq!(parse_iso_duration("P1D"), None);
        assert_eq!(parse_iso_duration("PT4"), None);
    }

    #[test]
    fn dump_header_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ocw.json");
        std::fs::write(
            &path,
            r#"{"source":"mit_open_course_ware","skill":"sql","level":"master","records":[{"title":"a","url":"u"},{"title":"b","url":"v","source":"wikipedia"}]}"#,
        )
        .unwrap();
        let recs = read_dump(&path).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].source, "mit_open_course_ware");
        assert_eq!(recs[1].source, "wikipedia");
        assert_eq!(recs[1].dump_position, 2);
        assert_eq!(recs[0].payload["skill"], "sql");
    }
}
