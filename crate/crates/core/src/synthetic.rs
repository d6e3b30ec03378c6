//! Deterministic synthetic fixtures: a small skills world with vacancies,
//! embeddings, quality training tables, repository dumps and scored corpora.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};

use crate::embeddings::EmbeddingTable;
use crate::error::Result;
use crate::fsutil::{write_atomic, write_json_atomic};
use crate::market::{SkillLexiconEntry, Vacancy};
use crate::model::{ExpertiseLevel, MediaKind, NativeRate, OerRecord, SourceRepository};
use crate::quality::{CompletenessWeights, Dataset, MetadataRecord, MetadataTable, PropertyFeatures, PropertyTable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(id, name, aliases, topic words)`
pub const SKILLS: [(&str, &str, &[&str], [&str; 4]); 20] = [
    ("sql", "SQL", &["sql", "structured query language"], ["query", "table", "join", "database"]),
    ("python", "Python", &["python"], ["python", "script", "interpreter", "module"]),
    (
        "machine_learning",
        "Machine learning",
        &["machine learning", "ml"],
        ["model", "training", "prediction", "dataset"],
    ),
    (
        "statistics",
        "Statistics",
        &["statistics", "statistical analysis"],
        ["probability", "variance", "distribution", "regression"],
    ),
    ("excel", "Excel", &["excel", "spreadsheets"], ["spreadsheet", "cell", "formula", "pivot"]),
    ("javascript", "JavaScript", &["javascript", "js"], ["browser", "dom", "event", "frontend"]),
    (
        "project_management",
        "Project management",
        &["project management"],
        ["schedule", "milestone", "stakeholder", "scope"],
    ),
    (
        "communication",
        "Communication",
        &["communication skills", "communication"],
        ["audience", "message", "presentation", "listening"],
    ),
    ("cloud", "Cloud computing", &["cloud computing", "aws", "azure"], ["cloud", "server", "deployment", "container"]),
    (
        "data_visualization",
        "Data visualization",
        &["data visualization", "dashboards"],
        ["chart", "plot", "dashboard", "visual"],
    ),
    ("linux", "Linux", &["linux", "unix"], ["kernel", "shell", "terminal", "command"]),
    ("networking", "Networking", &["networking", "tcp/ip"], ["network", "router", "protocol", "packet"]),
    (
        "security",
        "Cybersecurity",
        &["cybersecurity", "information security"],
        ["threat", "encryption", "firewall", "attack"],
    ),
    ("java", "Java", &["java"], ["class", "object", "jvm", "inheritance"]),
    ("accounting", "Accounting", &["accounting", "bookkeeping"], ["ledger", "balance", "invoice", "audit"]),
    ("marketing", "Digital marketing", &["digital marketing", "seo"], ["campaign", "brand", "customer", "advertising"]),
    ("git", "Git", &["git", "version control"], ["commit", "branch", "merge", "repository"]),
    ("testing", "Software testing", &["software testing", "unit testing"], ["test", "assertion", "coverage", "bug"]),
    ("agile", "Agile", &["agile", "scrum"], ["sprint", "backlog", "standup", "iteration"]),
    (
        "deep_learning",
        "Deep learning",
        &["deep learning", "neural networks"],
        ["neuron", "layer", "gradient", "backpropagation"],
    ),
];

pub const JOBS: [(&str, &[&str]); 8] = [
    (
        "Data Scientist",
        &["python", "statistics", "machine_learning", "sql", "data_visualization", "deep_learning", "git"],
    ),
    ("Data Analyst", &["sql", "excel", "statistics", "data_visualization", "python", "communication"]),
    ("Software Developer", &["javascript", "java", "git", "testing", "agile", "linux", "sql"]),
    ("DevOps Engineer", &["linux", "cloud", "git", "networking", "security", "python"]),
    ("Project Manager", &["project_management", "agile", "communication", "excel"]),
    ("Accountant", &["accounting", "excel", "communication"]),
    ("Marketing Specialist", &["marketing", "communication", "data_visualization", "excel"]),
    ("Security Analyst", &["security", "networking", "linux", "python"]),
];

pub const PLACES: [(&str, &str); 6] = [
    ("Germany", "Berlin"),
    ("Germany", "Munich"),
    ("Spain", "Madrid"),
    ("Spain", "Barcelona"),
    ("Greece", "Athens"),
    ("Netherlands", "Amsterdam"),
];

const FILLER: [&str; 16] = [
    "the",
    "and",
    "we",
    "our",
    "team",
    "you",
    "will",
    "work",
    "with",
    "strong",
    "experience",
    "in",
    "for",
    "a",
    "role",
    "company",
];

pub fn skill_ids() -> Vec<&'static str> {
    SKILLS.iter().map(|s| s.0).collect()
}

fn topic_words(skill: &str) -> &'static [&'static str; 4] {
    &SKILLS.iter().find(|s| s.0 == skill).expect("known skill").3
}

pub fn lexicon() -> Vec<SkillLexiconEntry> {
    SKILLS
        .iter()
        .map(|(id, name, aliases, _)| SkillLexiconEntry {
            id: id.to_string(),
            name: name.to_string(),
            aliases: aliases.iter().map(|a| a.to_string()).collect(),
            description: None,
        })
        .collect()
}

pub fn skill_descriptions() -> BTreeMap<String, String> {
    SKILLS
        .iter()
        .map(|(id, name, _, w)| {
            (id.to_string(), format!("{name}: working with {}, {}, {} and {}.", w[0], w[1], w[2], w[3]))
        })
        .collect()
}

/// Word vectors where each skill's topic words cluster around a shared centre.
pub fn embeddings(dim: usize, seed: u64) -> EmbeddingTable<f64> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 0.35).expect("valid sd");
    let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
    for (_, name, _, words) in SKILLS {
        let centre: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        for w in words {
            entries.push((w.to_string(), centre.iter().map(|c| c + noise.sample(&mut r)).collect()));
        }
        for w in name.split_whitespace() {
            let w = w.to_lowercase();
            if !entries.iter().any(|(e, _)| *e == w) {
                entries.push((w, centre.iter().map(|c| c + noise.sample(&mut r)).collect()));
            }
        }
    }
    for w in FILLER.iter().chain(&["working", "with"]) {
        if !entries.iter().any(|(e, _)| e == w) {
            entries.push((w.to_string(), (0..dim).map(|_| r.random_range(-0.2..0.2)).collect()));
        }
    }
    EmbeddingTable::from_entries(dim, entries).expect("consistent dimension")
}

/// The plain text format read by [`EmbeddingTable::load`].
pub fn embeddings_text(table: &EmbeddingTable<f64>) -> String {
    let mut out = String::new();
    for (token, v) in table.entries() {
        out.push_str(token);
        for x in v {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    out
}

pub fn vacancies(n: usize, seed: u64) -> Vec<Vacancy> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let (title, skills) = JOBS.choose(&mut r).expect("jobs");
            let (country, city) = PLACES.choose(&mut r).expect("places");
            let mut picked: Vec<&str> = skills.to_vec();
            picked.shuffle(&mut r);
            picked.truncate(r.random_range(2..=skills.len()));
            if r.random_bool(0.2) {
                picked.push(SKILLS.choose(&mut r).expect("skills").0);
            }
            let mut body = format!("{title} wanted.");
            for s in picked {
                let aliases = SKILLS.iter().find(|x| x.0 == s).expect("skill").2;
                let alias = aliases.choose(&mut r).expect("alias");
                let f1 = FILLER.choose(&mut r).expect("filler");
                let f2 = FILLER.choose(&mut r).expect("filler");
                let _ = write!(body, " {f1} {f2} {alias},");
            }
            Vacancy {
                id: format!("v{i:04}"),
                job_title: title.to_string(),
                country: country.to_string(),
                city: city.to_string(),
                posted_date: chrono::NaiveDate::from_ymd_opt(2023, 1 + (i % 12) as u32, 1 + (i % 28) as u32),
                body,
            }
        })
        .collect()
}

/// Two well separated classes on feature 0 plus uninformative noise features.
pub fn separable_dataset(n: usize, n_noise: usize, seed: u64) -> Dataset<f64> {
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % 2 == 0;
        let x0 = if label { r.random_range(0.6..1.0) } else { r.random_range(0.0..0.4) };
        let mut row = vec![x0];
        row.extend((0..n_noise).map(|_| r.random_range(0.0..1.0)));
        rows.push(row);
        labels.push(label);
    }
    let names = (0..=n_noise).map(|i| format!("f{i}")).collect();
    Dataset::new(names, rows, labels).expect("well formed")
}

/// Latent quality of a set of properties, roughly in [0,1].
fn latent_property_quality(f: &PropertyFeatures<f64>) -> f64 {
    let rate = f.rate.unwrap_or(0.5);
    let sim = f.skill_similarity.map_or(0.5, |s| (s + 1.0) / 2.0);
    let views = f.view_count.map_or(0.5, |v| ((v + 1.0).log10() / 6.0).min(1.0));
    let rps = f.ranking_position_score.unwrap_or(0.3);
    0.4 * rate + 0.3 * sim + 0.15 * views + 0.15 * rps
}

fn sample_properties(r: &mut ChaCha8Rng, kind: MediaKind) -> PropertyFeatures<f64> {
    let length = match kind {
        MediaKind::Video => r.random_range(60.0..3600.0),
        MediaKind::Text => r.random_range(200.0..8000.0),
    };
    let relevant = r.random_bool(0.8);
    PropertyFeatures {
        length: Some(length),
        rate: r.random_bool(0.85).then(|| r.random_range(0.2..1.0)),
        skill_similarity: r.random_bool(0.8).then(|| {
            if relevant {
                r.random_range(0.6..1.0)
            } else {
                r.random_range(-0.3..0.4)
            }
        }),
        view_count: r.random_bool(0.75).then(|| 10f64.powf(r.random_range(1.0..6.0)).round()),
        ranking_position_score: Some(1.0 / r.random_range(1..=10) as f64),
    }
}

/// Property rows labelled by a noisy threshold on a hidden linear quality.
pub fn property_training_table(n: usize, seed: u64) -> PropertyTable<f64> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 0.04).expect("valid sd");
    let mut t = PropertyTable::default();
    for i in 0..n {
        let kind = if i % 2 == 0 { MediaKind::Video } else { MediaKind::Text };
        let f = sample_properties(&mut r, kind);
        let q = latent_property_quality(&f) + noise.sample(&mut r);
        t.push(f, q >= 0.55);
    }
    t
}

fn sample_metadata_presence(r: &mut ChaCha8Rng) -> [bool; 8] {
    [true, r.random_bool(0.8), true, r.random_bool(0.9), true, r.random_bool(0.75), true, true]
}

/// Presence rows labelled by a noisy threshold on completeness.
pub fn metadata_training_table(n: usize, seed: u64) -> MetadataTable {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 0.03).expect("valid sd");
    let w = CompletenessWeights::default();
    let mut t = MetadataTable::default();
    for _ in 0..n {
        let mut present = sample_metadata_presence(&mut r);
        if r.random_bool(0.15) {
            present[0] = false;
            present[6] = r.random_bool(0.5);
        }
        let md = MetadataRecord { present };
        let c: f64 = md.present.iter().zip(w.0).filter(|(p, _)| **p).map(|(_, w)| w).sum();
        t.push(md, c + noise.sample(&mut r) >= 0.7);
    }
    t
}

fn transcript(r: &mut ChaCha8Rng, skill: &str, relevant: bool) -> String {
    let words = if relevant {
        topic_words(skill)
    } else {
        let other = SKILLS.iter().filter(|s| s.0 != skill).collect::<Vec<_>>();
        &other.choose(r).expect("skills").3
    };
    (0..12)
        .map(|i| if i % 3 == 2 { *FILLER.choose(r).expect("filler") } else { *words.choose(r).expect("words") })
        .collect::<Vec<_>>()
        .join(" ")
}

/// One dump file per source in that repository's native field names.
/// Returns `(file name, contents)` pairs.
pub fn repository_dumps(skills: &[&str], per_cell: usize, seed: u64) -> Vec<(String, Value)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for source in SourceRepository::ALL {
        let mut records = Vec::new();
        for &skill in skills {
            for level in ExpertiseLevel::ALL {
                for k in 0..per_cell {
                    let pos = k + 1;
                    let f = sample_properties(&mut r, source.media_kind());
                    let md = sample_metadata_presence(&mut r);
                    let title = format!("{} {} {}", level.as_str(), skill.replace('_', " "), k + 1);
                    let id = format!("{skill}-{}-{k}", level.ordinal());
                    let url = format!("https://{}.example/{id}", source.tag());
                    let desc = md[1].then(|| format!("Learn {} at {} level", skill.replace('_', " "), level));
                    let lang = md[5].then_some("en");
                    let has_length = md[3];
                    let tr = f.skill_similarity.map(|s| transcript(&mut r, skill, s > 0.5));
                    let len = f.length.filter(|_| has_length);
                    let views = f.view_count.map(|v| v as u64);
                    let rate = f.rate;
                    let mut p = match source {
                        SourceRepository::Youtube => json!({
                            "videoId": id, "title": title, "link": url, "summary": desc,
                            "duration": len.map(|l| format!("PT{}M{}S", (l / 60.0) as u64, (l % 60.0) as u64)),
                            "viewCount": views.map(|v| v.to_string()),
                            "likeCount": rate.map(|x| (x * 1000.0).round() as u64),
                            "dislikeCount": rate.map(|x| ((1.0 - x) * 1000.0).round() as u64),
                            "transcript": tr, "default_language": lang, "position": pos,
                        }),
                        SourceRepository::KhanAcademy => json!({
                            "id": id, "title": title, "url": url, "description": desc,
                            "duration": len, "views": views,
                            "likes": rate.map(|x| (x * 200.0).round() as u64),
                            "dislikes": rate.map(|x| ((1.0 - x) * 200.0).round() as u64),
                            "captions": tr, "lang": lang, "rank": pos,
                        }),
                        SourceRepository::Wikipedia => json!({
                            "page_title": title, "permalink": url, "extract": desc, "word_count": len,
                            "views": views, "stars": rate.map(|x| (x * 50.0).round() / 10.0),
                            "text": tr, "lang": lang, "search_rank": pos,
                        }),
                        SourceRepository::OerCommons => json!({
                            "resource_id": id, "name": title, "url": url, "abstract": desc,
                            "word_count": len, "views": views,
                            "average_rating": rate.map(|x| (x * 50.0).round() / 10.0),
                            "content": tr, "language": lang, "position": pos,
                        }),
                        _ => json!({
                            "identifier": id, "title": title, "url": url, "description": desc,
                            "length": len, "view_count": views,
                            "rating": rate.map(|x| (x * 50.0).round() / 10.0),
                            "transcription": tr, "language": lang, "position": pos,
                        }),
                    };
                    let obj = p.as_object_mut().expect("object");
                    obj.retain(|_, v| !v.is_null());
                    obj.insert("skill".into(), json!(skill));
                    obj.insert("level".into(), json!(level.as_str()));
                    records.push(p);
                }
            }
        }
        out.push((format!("{}.json", source.tag()), json!({ "source": source.tag(), "records": records })));
    }
    out
}

/// Quality-scored records ready for recommendation, `per_cell` for every
/// skill and level. Ids are `oer-<n>`.
pub fn scored_corpus(skills: &[&str], per_cell: usize, seed: u64) -> Vec<OerRecord> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for &skill in skills {
        for level in ExpertiseLevel::ALL {
            for k in 0..per_cell {
                let source = *SourceRepository::ALL.choose(&mut r).expect("sources");
                let mut o = OerRecord::new(
                    format!("oer-{}", out.len()),
                    source,
                    format!("{skill} {level} {k}"),
                    skill,
                    level,
                    format!("https://{}.example/{skill}/{k}", source.tag()),
                );
                o.length = r.random_bool(0.9).then(|| match source.media_kind() {
                    MediaKind::Video => r.random_range(60.0..3600.0),
                    MediaKind::Text => r.random_range(200.0..8000.0),
                });
                o.native_rate = r.random_bool(0.85).then(|| NativeRate::Stars { stars: r.random_range(1.0..5.0) });
                o.skill_similarity = r.random_bool(0.8).then(|| r.random_range(-0.2..1.0));
                o.view_count = Some(r.random_range(10..1_000_000));
                let pos = (k % 10) as u32 + 1;
                o.ranking_position = Some(pos);
                o.ranking_position_score = Some(1.0 / pos as f64);
                o.quality_meta = Some(r.random_range(0.5..=1.0));
                o.quality_prop = Some(r.random_range(0.5..=1.0));
                out.push(o);
            }
        }
    }
    out
}

/// Dump records per source, skill and level in the fixture bundle.
pub const FIXTURE_DUMP_PER_CELL: usize = 3;

/// Writes every input the CLI pipeline needs under `dir`:
/// `properties.csv`, `metadata.csv`, `vacancies/`, `lexicon.json`,
/// `descriptions.json`, `embeddings.txt` and `dumps/`.
pub fn write_fixture_bundle(dir: &Path, seed: u64) -> Result<()> {
    use crate::quality::training_data::{write_metadata_csv, write_property_csv};
    std::fs::create_dir_all(dir.join("vacancies")).map_err(|e| crate::Error::io(dir, e))?;
    std::fs::create_dir_all(dir.join("dumps")).map_err(|e| crate::Error::io(dir, e))?;
    write_atomic(&dir.join("properties.csv"), write_property_csv(&property_training_table(600, seed)).as_bytes())?;
    write_atomic(&dir.join("metadata.csv"), write_metadata_csv(&metadata_training_table(600, seed + 1)).as_bytes())?;
    write_json_atomic(&dir.join("vacancies/vacancies.json"), &vacancies(500, seed + 2))?;
    write_json_atomic(&dir.join("lexicon.json"), &lexicon())?;
    write_json_atomic(&dir.join("descriptions.json"), &skill_descriptions())?;
    write_atomic(&dir.join("embeddings.txt"), embeddings_text(&embeddings(16, seed + 3)).as_bytes())?;
    for (name, value) in repository_dumps(&skill_ids(), FIXTURE_DUMP_PER_CELL, seed + 4) {
        write_json_atomic(&dir.join("dumps").join(name), &value)?;
    }
    Ok(())
}
