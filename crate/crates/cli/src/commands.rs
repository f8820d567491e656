use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use descry_core::dictionary::{
    CachedProvider, DescriptorGenerator, DictionarySet, HttpProvider, LlmProvider, OfflineProvider,
};
use descry_core::embedding::{EmbeddingStore, StoreKind};
use descry_core::eval::{
    evaluate, make_synthetic_oracle, recall_at_k, retrieve_topk, retrieve_topk_baseline, subgroup_accuracy,
    DatasetManifest, OracleConfig,
};
use descry_core::scoring::{Aggregation, ExplanationView, ScoringIndex};
use descry_service::AppState;
use serde_json::json;

use crate::{Command, Inputs};

struct Loaded {
    images: EmbeddingStore,
    texts: EmbeddingStore,
    dictionaries: DictionarySet,
}

fn load_store(path: &Path, kind: StoreKind) -> Result<EmbeddingStore> {
    let store = EmbeddingStore::load(path)?;
    if store.kind() != kind {
        bail!(
            "{} holds {:?} embeddings, expected {:?}",
            path.display(),
            store.kind(),
            kind
        );
    }
    Ok(store)
}

fn load(inputs: &Inputs) -> Result<Loaded> {
    let images = load_store(&inputs.images, StoreKind::Image)?;
    let texts = load_store(&inputs.texts, StoreKind::Text)?;
    if images.dim() != texts.dim() {
        bail!(
            "image store has dim {}, text store has dim {}",
            images.dim(),
            texts.dim()
        );
    }
    Ok(Loaded {
        images,
        texts,
        dictionaries: DictionarySet::load(&inputs.dictionaries)?,
    })
}

fn print(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            categories,
            out,
            cache_dir,
            offline,
            model,
        } => {
            if offline {
                generate(
                    &categories,
                    &out,
                    CachedProvider::new(OfflineProvider, cache_dir),
                    model,
                )
            } else {
                let http = HttpProvider::from_env()?;
                generate(&categories, &out, CachedProvider::new(http, cache_dir), model)
            }
        }
        Command::Texts {
            dictionaries,
            missing_from,
            baseline,
        } => {
            let dicts = DictionarySet::load(&dictionaries)?;
            let mut texts: BTreeSet<String> = dicts.grounded_texts().into_iter().map(str::to_owned).collect();
            if let Some(t) = baseline {
                for category in dicts.iter() {
                    texts.extend(t.spec().texts_for(category.display_name()));
                }
            }
            if let Some(path) = missing_from {
                let store = load_store(&path, StoreKind::Text)?;
                texts.retain(|t| !store.contains(t));
            }
            let mut out = io::stdout().lock();
            for t in texts {
                writeln!(out, "{t}")?;
            }
            Ok(())
        }
        Command::Classify {
            inputs,
            image_id,
            mode,
            baseline,
            json,
        } => {
            let l = load(&inputs)?;
            let result = match baseline {
                None => ScoringIndex::build(&l.dictionaries, &l.texts)?.classify(&image_id, &l.images, mode.into())?,
                Some(t) => ScoringIndex::baseline(&l.dictionaries, &l.texts, &t.spec())?.classify(
                    &image_id,
                    &l.images,
                    Aggregation::Mean,
                )?,
            };
            if json {
                return print(&result.to_json());
            }
            let mut text = format!("{}: {}\n", result.image_id, result.winner);
            for r in result.ranked.iter().take(5) {
                text.push_str(&format!("  {:>8.4}  {}\n", r.score, r.category_id));
            }
            print(&text)
        }
        Command::Explain {
            inputs,
            image_id,
            contrast,
            mode,
            json,
        } => {
            let l = load(&inputs)?;
            let result = ScoringIndex::build(&l.dictionaries, &l.texts)?.classify(&image_id, &l.images, mode.into())?;
            let view = ExplanationView::from_result(&result, contrast.as_deref())?;
            if json {
                print(&view.to_json())
            } else {
                print(&view.render_text(40))
            }
        }
        Command::Retrieve {
            inputs,
            category,
            k,
            mode,
            baseline,
            relevant,
            json,
        } => {
            let l = load(&inputs)?;
            let ranked = match baseline {
                None => retrieve_topk(&category, &l.dictionaries, &l.images, &l.texts, k, mode.into())?,
                Some(t) => retrieve_topk_baseline(&category, &l.dictionaries, &l.images, &l.texts, k, &t.spec())?,
            };
            let recall = match relevant {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let set: BTreeSet<String> = text
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(str::to_owned)
                        .collect();
                    Some(recall_at_k(&category, &ranked, &set, k)?)
                }
                None => None,
            };
            if json {
                let body = json!({ "category_id": category, "k": k, "retrieved": ranked, "recall": recall });
                return print(&serde_json::to_string_pretty(&body)?);
            }
            let mut text = String::new();
            for (i, r) in ranked.iter().enumerate() {
                text.push_str(&format!("{:>4}  {:>8.4}  {}\n", i + 1, r.score, r.image_id));
            }
            if let Some(r) = recall {
                text.push_str(&format!(
                    "recall@{}: {}/{} = {:.3}\n",
                    r.k, r.hits, r.total_relevant, r.recall
                ));
            }
            print(&text)
        }
        Command::Evaluate {
            inputs,
            manifest,
            mode,
            templates,
            subgroups,
            json,
        } => {
            let l = load(&inputs)?;
            let manifest = DatasetManifest::load(&manifest)?;
            let report = evaluate(
                &manifest,
                &l.dictionaries,
                &l.images,
                &l.texts,
                mode.into(),
                &templates.spec(),
            )?;
            let groups = if subgroups {
                Some(subgroup_accuracy(
                    &manifest,
                    &l.dictionaries,
                    &l.images,
                    &l.texts,
                    mode.into(),
                )?)
            } else {
                None
            };
            if json {
                let mut body = serde_json::to_value(&report)?;
                if let Some(g) = &groups {
                    body["subgroups"] = serde_json::to_value(g)?;
                }
                return print(&serde_json::to_string_pretty(&body)?);
            }
            let mut text = report.render_table();
            if let Some(g) = groups {
                text.push('\n');
                for (name, s) in &g.subgroups {
                    text.push_str(&format!("{name:<24} {:>8.2} {:>8}\n", 100.0 * s.accuracy, s.n));
                }
            }
            print(&text)
        }
        Command::Oracle {
            seed,
            categories,
            descriptors,
            images,
            noise,
            dim,
            out,
        } => {
            let config = OracleConfig::new(seed, categories, descriptors, images, noise).with_dim(dim);
            let o = make_synthetic_oracle(config)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            o.images.save(out.join("images.dscr"))?;
            o.texts.save(out.join("texts.dscr"))?;
            o.dictionaries.save(out.join("dictionaries.json"))?;
            o.manifest.save(out.join("manifest.jsonl"))?;
            fs::write(
                out.join("answers.json"),
                serde_json::to_string_pretty(&o.answers)? + "\n",
            )?;
            print(&format!(
                "oracle accuracy: mean {:.4}, max {:.4}, baseline {:.4}",
                o.mean_accuracy(),
                o.max_accuracy(),
                o.baseline_accuracy()
            ))
        }
        Command::Serve { inputs, port, host } => {
            let l = load(&inputs)?;
            let addr: SocketAddr = format!("{host}:{port}").parse().context("invalid host or port")?;
            let state = AppState::new(l.dictionaries, l.images, l.texts).with_dictionary_path(&inputs.dictionaries);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(descry_service::serve(addr, Arc::new(state)))?;
            Ok(())
        }
    }
}

/// Parses `id` or `id<TAB>display name` lines; `#` starts a comment.
fn read_categories(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (id, display) = match line.split_once('\t') {
            Some((id, display)) => (id.trim(), display.trim()),
            None => (line.trim(), line.trim()),
        };
        out.push((id.to_owned(), display.to_owned()));
    }
    Ok(out)
}

fn generate<P: LlmProvider>(categories: &Path, out: &Path, provider: P, model: String) -> Result<()> {
    let generator = DescriptorGenerator::new(provider).with_model(model);
    let mut dictionaries = if out.exists() {
        DictionarySet::load(out)?
    } else {
        DictionarySet::new()
    };
    let mut failed = Vec::new();
    for (id, display) in read_categories(categories)? {
        match generator.generate(&id, &display) {
            Ok(dict) => {
                log::info!("{id}: {} descriptors", dict.len());
                dictionaries.insert(dict);
            }
            Err(e) => {
                log::error!("{id}: {e}");
                failed.push(id);
            }
        }
    }
    dictionaries.save(out)?;
    if !failed.is_empty() {
        bail!("{} categories failed: {}", failed.len(), failed.join(", "));
    }
    Ok(())
}
