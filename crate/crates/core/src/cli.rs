//! The `cjtk` command line: `cjtk <input> <stage> [options] [<stage> ...]`.
//!
//! Stages run left to right on one in-memory model. Exit codes: 0 success,
//! 1 validation warnings, 2 errors, 3 usage errors (bad arguments or
//! unreadable files).

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::codec::{self, Format};
use crate::error::Error;
use crate::extensions::{extension_findings, load_extension_file, validate_extended, Extension};
use crate::geoprocess::{dedupe_vertices, dequantize, quantize, remove_orphan_vertices, QuantizationParams};
use crate::gml::import_citygml;
use crate::model::CityModel;
use crate::ops::{self, IdPolicy, PartitionStrategy, Selector};
use crate::validator::{validate, ValidationReport};

pub const USAGE: &str = "\
usage: cjtk <input|-> <stage> [options] [<stage> [options] ...]

stages:
  validate [--extension FILE]... [--jsonl]
  compress [--digits D]                 quantize vertices (default D = 3)
  decompress                            back to real coordinates
  dedupe [--tolerance T]                merge duplicate vertices
  clean                                 remove unreferenced vertices
  subset (--id ID... | --type T... | --bbox MINX,MINY,MAXX,MAXY)
  merge FILE... [--policy error|suffix]
  partition (--grid NxM | --by-type | --random K [--seed S]) [--out-dir DIR] [--stem NAME]
  textures-path --base PREFIX
  metadata                              recompute derived metadata
  info                                  print statistics as JSON
  import [--report FILE]                read the input as CityGML 2.0
  save FILE|- [--pretty]

environment:
  CJTK_EXTENSIONS   extension files or directories, loaded by every validate stage
";

const STAGES: &[&str] = &[
    "validate",
    "compress",
    "decompress",
    "dedupe",
    "clean",
    "subset",
    "merge",
    "partition",
    "textures-path",
    "metadata",
    "info",
    "import",
    "save",
];

/// Streams and settings a run uses instead of process globals.
pub struct Env<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    /// Value of `CJTK_EXTENSIONS`.
    pub extension_path: Option<OsString>,
}

#[derive(Clone, Debug, PartialEq)]
enum Stage {
    Validate { extensions: Vec<PathBuf>, jsonl: bool },
    Compress { digits: u32 },
    Decompress,
    Dedupe { tolerance: f64 },
    Clean,
    Subset(Selector),
    Merge { files: Vec<PathBuf>, policy: IdPolicy },
    Partition { strategy: PartitionStrategy, out_dir: Option<PathBuf>, stem: Option<String> },
    TexturesPath { base: String },
    Metadata,
    Info,
    Import { report: Option<PathBuf> },
    Save { path: String, pretty: bool },
}

impl Stage {
    fn name(&self) -> &'static str {
        match self {
            Stage::Validate { .. } => "validate",
            Stage::Compress { .. } => "compress",
            Stage::Decompress => "decompress",
            Stage::Dedupe { .. } => "dedupe",
            Stage::Clean => "clean",
            Stage::Subset(_) => "subset",
            Stage::Merge { .. } => "merge",
            Stage::Partition { .. } => "partition",
            Stage::TexturesPath { .. } => "textures-path",
            Stage::Metadata => "metadata",
            Stage::Info => "info",
            Stage::Import { .. } => "import",
            Stage::Save { .. } => "save",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Op(String),
}

fn usage(stage: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{stage}: {msg}"))
}

fn op(stage: &str, e: Error) -> Failure {
    match e {
        Error::Io(m) => Failure::Usage(format!("{stage}: {m}")),
        e => Failure::Op(format!("{stage}: {}: {e}", e.code())),
    }
}

/// Options of one stage with their values, in order.
struct Opts<'a> {
    stage: &'a str,
    args: &'a [String],
    pos: usize,
}

impl<'a> Opts<'a> {
    fn next(&mut self) -> Option<&'a str> {
        let a = self.args.get(self.pos)?;
        self.pos += 1;
        Some(a)
    }

    fn value(&mut self, flag: &str) -> Result<&'a str, Failure> {
        self.next()
            .ok_or_else(|| usage(self.stage, format!("{flag} needs a value")))
    }

    fn parsed<T: std::str::FromStr>(&mut self, flag: &str) -> Result<T, Failure> {
        let v = self.value(flag)?;
        v.parse()
            .map_err(|_| usage(self.stage, format!("bad value `{v}` for {flag}")))
    }
}

fn takes_value(stage: &str, flag: &str) -> bool {
    matches!(
        (stage, flag),
        ("validate", "--extension")
            | ("compress", "--digits")
            | ("dedupe", "--tolerance")
            | ("subset", "--id" | "--type" | "--bbox")
            | ("merge", "--policy")
            | ("partition", "--grid" | "--random" | "--seed" | "--out-dir" | "--stem")
            | ("textures-path", "--base")
            | ("import", "--report")
    )
}

fn parse_stage(name: &str, args: &[String]) -> Result<Stage, Failure> {
    let mut o = Opts { stage: name, args, pos: 0 };
    let unknown = |a: &str| usage(name, format!("unexpected argument `{a}`"));
    let stage = match name {
        "validate" => {
            let (mut extensions, mut jsonl) = (Vec::new(), false);
            while let Some(a) = o.next() {
                match a {
                    "--extension" => extensions.push(PathBuf::from(o.value(a)?)),
                    "--jsonl" => jsonl = true,
                    _ => return Err(unknown(a)),
                }
            }
            Stage::Validate { extensions, jsonl }
        }
        "compress" => {
            let mut digits = 3;
            while let Some(a) = o.next() {
                match a {
                    "--digits" => digits = o.parsed(a)?,
                    _ => return Err(unknown(a)),
                }
            }
            Stage::Compress { digits }
        }
        "dedupe" => {
            let mut tolerance: f64 = 0.0;
            while let Some(a) = o.next() {
                match a {
                    "--tolerance" => tolerance = o.parsed(a)?,
                    _ => return Err(unknown(a)),
                }
            }
            if !(tolerance >= 0.0 && tolerance.is_finite()) {
                return Err(usage(name, "tolerance must be a non-negative number"));
            }
            Stage::Dedupe { tolerance }
        }
        "subset" => {
            let (mut ids, mut types, mut bbox) = (Vec::new(), Vec::new(), None);
            while let Some(a) = o.next() {
                match a {
                    "--id" => ids.push(o.value(a)?.to_string()),
                    "--type" => types.push(o.value(a)?.to_string()),
                    "--bbox" => {
                        let v = o.value(a)?;
                        let nums: Vec<f64> = v
                            .split(',')
                            .map(|x| x.trim().parse())
                            .collect::<Result<_, _>>()
                            .map_err(|_| usage(name, format!("bad bbox `{v}`")))?;
                        let b: [f64; 4] = nums
                            .try_into()
                            .map_err(|_| usage(name, "bbox needs 4 numbers"))?;
                        bbox = Some(b);
                    }
                    _ => return Err(unknown(a)),
                }
            }
            match (ids.is_empty(), types.is_empty(), bbox) {
                (false, true, None) => Stage::Subset(Selector::Ids(ids)),
                (true, false, None) => Stage::Subset(Selector::Types(types)),
                (true, true, Some(b)) => Stage::Subset(Selector::BBox(b)),
                _ => return Err(usage(name, "give exactly one of --id, --type, --bbox")),
            }
        }
        "merge" => {
            let (mut files, mut policy) = (Vec::new(), IdPolicy::Error);
            while let Some(a) = o.next() {
                match a {
                    "--policy" => {
                        policy = match o.value(a)? {
                            "error" => IdPolicy::Error,
                            "suffix" => IdPolicy::Suffix,
                            v => return Err(usage(name, format!("unknown policy `{v}`"))),
                        }
                    }
                    f if !f.starts_with("--") => files.push(PathBuf::from(f)),
                    _ => return Err(unknown(a)),
                }
            }
            if files.is_empty() {
                return Err(usage(name, "no files to merge"));
            }
            Stage::Merge { files, policy }
        }
        "partition" => {
            let (mut strategy, mut seed, mut out_dir, mut stem) = (None, 0u64, None, None);
            let mut random_k = None;
            while let Some(a) = o.next() {
                match a {
                    "--grid" => {
                        let v = o.value(a)?;
                        let (nx, ny) = v
                            .split_once(['x', 'X'])
                            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                            .ok_or_else(|| usage(name, format!("bad grid `{v}`, expected NxM")))?;
                        strategy = Some(PartitionStrategy::Grid { nx, ny });
                    }
                    "--by-type" => strategy = Some(PartitionStrategy::ByType),
                    "--random" => random_k = Some(o.parsed::<usize>(a)?),
                    "--seed" => seed = o.parsed(a)?,
                    "--out-dir" => out_dir = Some(PathBuf::from(o.value(a)?)),
                    "--stem" => stem = Some(o.value(a)?.to_string()),
                    _ => return Err(unknown(a)),
                }
            }
            if let Some(k) = random_k {
                if strategy.is_some() {
                    return Err(usage(name, "give exactly one strategy"));
                }
                strategy = Some(PartitionStrategy::Random { k, seed });
            }
            let strategy = strategy.ok_or_else(|| usage(name, "needs --grid, --by-type or --random"))?;
            Stage::Partition { strategy, out_dir, stem }
        }
        "textures-path" => {
            let mut base = None;
            while let Some(a) = o.next() {
                match a {
                    "--base" => base = Some(o.value(a)?.to_string()),
                    _ => return Err(unknown(a)),
                }
            }
            Stage::TexturesPath {
                base: base.ok_or_else(|| usage(name, "needs --base"))?,
            }
        }
        "import" => {
            let mut report = None;
            while let Some(a) = o.next() {
                match a {
                    "--report" => report = Some(PathBuf::from(o.value(a)?)),
                    _ => return Err(unknown(a)),
                }
            }
            Stage::Import { report }
        }
        "save" => {
            let (mut path, mut pretty) = (None, false);
            while let Some(a) = o.next() {
                match a {
                    "--pretty" => pretty = true,
                    p if path.is_none() && (p == "-" || !p.starts_with("--")) => path = Some(p.to_string()),
                    _ => return Err(unknown(a)),
                }
            }
            let path = path.ok_or_else(|| usage(name, "needs an output path"))?;
            if path == "-" && pretty {
                return Err(usage(name, "standard output is written minified only"));
            }
            Stage::Save { path, pretty }
        }
        "decompress" | "clean" | "metadata" | "info" => {
            if let Some(a) = o.next() {
                return Err(unknown(a));
            }
            match name {
                "decompress" => Stage::Decompress,
                "clean" => Stage::Clean,
                "metadata" => Stage::Metadata,
                _ => Stage::Info,
            }
        }
        other => return Err(usage(other, "unknown stage")),
    };
    Ok(stage)
}

fn parse_args(args: &[String]) -> Result<(String, Vec<Stage>), Failure> {
    let Some((input, rest)) = args.split_first() else {
        return Err(Failure::Usage("missing input".into()));
    };
    if rest.is_empty() {
        return Err(Failure::Usage("no stages given".into()));
    }
    let mut stages = Vec::new();
    let mut i = 0;
    while i < rest.len() {
        let name = rest[i].as_str();
        if !STAGES.contains(&name) {
            return Err(usage(name, "unknown stage"));
        }
        let start = i + 1;
        let mut j = start;
        while j < rest.len() && !STAGES.contains(&rest[j].as_str()) {
            j += if takes_value(name, &rest[j]) { 2 } else { 1 };
        }
        let j = j.min(rest.len());
        stages.push(parse_stage(name, &rest[start..j])?);
        i = j;
    }
    Ok((input.clone(), stages))
}

enum State {
    Raw(Vec<u8>),
    Model(Box<CityModel>),
}

impl State {
    fn model(&mut self, stage: &str) -> Result<&mut CityModel, Failure> {
        if let State::Raw(bytes) = self {
            let (m, _) = codec::parse(bytes).map_err(|e| op(stage, e))?;
            *self = State::Model(Box::new(m));
        }
        match self {
            State::Model(m) => Ok(m),
            State::Raw(_) => unreachable!(),
        }
    }
}

fn read_path(path: &Path, stage: &str) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| usage(stage, format!("cannot read {}: {e}", path.display())))
}

fn extension_files(path: &OsString) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for p in std::env::split_paths(path) {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(&p)
                .into_iter()
                .flatten()
                .flatten()
                .map(|e| e.path())
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            out.extend(files);
        } else if !p.as_os_str().is_empty() {
            out.push(p);
        }
    }
    out
}

fn load_extensions(files: &[PathBuf]) -> Result<Vec<Extension>, Failure> {
    files
        .iter()
        .map(|f| {
            if !f.exists() {
                return Err(usage("validate", format!("cannot read {}", f.display())));
            }
            load_extension_file(f).map_err(|e| op("validate", e))
        })
        .collect()
}

fn write_out(w: &mut dyn Write, s: &str) -> Result<(), Failure> {
    w.write_all(s.as_bytes())
        .map_err(|e| Failure::Op(format!("output: {e}")))
}

fn execute(input: &str, stages: &[Stage], env: &mut Env) -> Result<i32, Failure> {
    let first = stages[0].name();
    let bytes = if input == "-" {
        let mut b = Vec::new();
        env.stdin
            .read_to_end(&mut b)
            .map_err(|e| usage(first, format!("cannot read standard input: {e}")))?;
        b
    } else {
        read_path(Path::new(input), first)?
    };
    let mut state = State::Raw(bytes);
    let mut exit = 0;

    for stage in stages {
        let name = stage.name();
        match stage {
            Stage::Validate { extensions, jsonl } => {
                let mut files = extensions.clone();
                if let Some(p) = &env.extension_path {
                    files.extend(extension_files(p));
                }
                let exts = load_extensions(&files)?;
                let report = match &state {
                    State::Raw(bytes) => {
                        let mut r = validate(bytes);
                        if r.is_valid() {
                            let (m, _) = codec::parse(bytes).map_err(|e| op(name, e))?;
                            r.merge(extension_findings(&m, &exts));
                            state = State::Model(Box::new(m));
                        }
                        r
                    }
                    State::Model(m) => validate_extended(m, &exts),
                };
                let text = if *jsonl { report.to_json_lines() } else { report.to_string() };
                write_out(env.stdout, &text)?;
                let code = ValidationReport::exit_code(&report);
                if code == 2 {
                    return Ok(2);
                }
                exit = exit.max(code);
            }
            Stage::Import { report } => {
                let State::Raw(bytes) = &state else {
                    return Err(usage(name, "must be the first stage"));
                };
                let (m, rep) = import_citygml(bytes).map_err(|e| op(name, e))?;
                if let Some(p) = report {
                    std::fs::write(p, rep.to_json_lines())
                        .map_err(|e| usage(name, format!("cannot write {}: {e}", p.display())))?;
                }
                let _ = writeln!(
                    env.stderr,
                    "cjtk: import: {} features, {} polygons, {} skipped elements",
                    rep.features.values().sum::<usize>(),
                    rep.polygons,
                    rep.skipped.len()
                );
                state = State::Model(Box::new(m));
            }
            Stage::Compress { digits } => {
                let m = state.model(name)?;
                *m = quantize(m, QuantizationParams::digits(*digits)).map_err(|e| op(name, e))?;
            }
            Stage::Decompress => {
                let m = state.model(name)?;
                *m = dequantize(m).map_err(|e| op(name, e))?;
            }
            Stage::Dedupe { tolerance } => {
                let m = state.model(name)?;
                *m = dedupe_vertices(m, *tolerance);
            }
            Stage::Clean => {
                let m = state.model(name)?;
                *m = remove_orphan_vertices(m);
            }
            Stage::Subset(sel) => {
                let m = state.model(name)?;
                *m = ops::subset(m, sel).map_err(|e| op(name, e))?;
            }
            Stage::Merge { files, policy } => {
                let mut models = vec![state.model(name)?.clone()];
                for f in files {
                    let b = read_path(f, name)?;
                    let (m, _) = codec::parse(&b).map_err(|e| op(name, e))?;
                    models.push(m);
                }
                state = State::Model(Box::new(ops::merge(&models, *policy).map_err(|e| op(name, e))?));
            }
            Stage::Partition { strategy, out_dir, stem } => {
                let m = state.model(name)?;
                let parts = ops::partition(m, strategy).map_err(|e| op(name, e))?;
                let input_path = Path::new(input);
                let dir = out_dir.clone().unwrap_or_else(|| match input_path.parent() {
                    Some(p) if input != "-" && !p.as_os_str().is_empty() => p.to_path_buf(),
                    _ => PathBuf::from("."),
                });
                let stem = stem.clone().unwrap_or_else(|| {
                    input_path
                        .file_stem()
                        .filter(|_| input != "-")
                        .map_or("stdin".into(), |s| s.to_string_lossy().into_owned())
                });
                std::fs::create_dir_all(&dir).map_err(|e| usage(name, format!("cannot create {}: {e}", dir.display())))?;
                for p in parts {
                    let path = dir.join(format!("{stem}_{}.json", p.id));
                    std::fs::write(&path, codec::serialize(&p.model, Format::Minified))
                        .map_err(|e| usage(name, format!("cannot write {}: {e}", path.display())))?;
                    let _ = writeln!(env.stderr, "cjtk: partition: wrote {}", path.display());
                }
            }
            Stage::TexturesPath { base } => {
                let m = state.model(name)?;
                *m = ops::update_texture_paths(m, base);
            }
            Stage::Metadata => {
                let m = state.model(name)?;
                *m = ops::refresh_metadata(m);
            }
            Stage::Info => {
                let m = state.model(name)?;
                let s = ops::stats(m);
                let info = serde_json::json!({
                    "version": m.version,
                    "referenceSystem": m.reference_system(),
                    "transform": m.transform.as_ref().map(|t| serde_json::json!({"scale": t.scale, "translate": t.translate})),
                    "cityObjects": s.city_objects,
                    "totalCityObjects": s.total_objects(),
                    "geometries": s.geometries,
                    "vertices": s.vertices,
                    "templates": s.templates,
                    "templateVertices": s.template_vertices,
                    "minifiedBytes": s.minified_bytes,
                });
                let text = serde_json::to_string_pretty(&info).expect("plain JSON");
                write_out(env.stdout, &format!("{text}\n"))?;
            }
            Stage::Save { path, pretty } => {
                let m = state.model(name)?;
                let fmt = if *pretty { Format::Pretty } else { Format::Minified };
                let text = codec::serialize(m, fmt);
                if path == "-" {
                    write_out(env.stdout, &text)?;
                } else {
                    std::fs::write(path, text).map_err(|e| usage(name, format!("cannot write {path}: {e}")))?;
                }
            }
        }
        if !matches!(stage, Stage::Partition { .. } | Stage::Import { .. }) {
            let _ = writeln!(env.stderr, "cjtk: {name}: ok");
        }
    }
    Ok(exit)
}

/// Runs one pipeline and returns the process exit code.
pub fn run(args: &[String], env: &mut Env) -> i32 {
    if args.is_empty() || args.iter().any(|a| a == "--help" || a == "-h") {
        let code = if args.is_empty() { 3 } else { 0 };
        let w: &mut dyn Write = if code == 0 { env.stdout } else { env.stderr };
        let _ = w.write_all(USAGE.as_bytes());
        return code;
    }
    let result = parse_args(args).and_then(|(input, stages)| execute(&input, &stages, env));
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(env.stderr, "cjtk: {m}\n\n{USAGE}");
            3
        }
        Err(Failure::Op(m)) => {
            let _ = writeln!(env.stderr, "cjtk: {m}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn parses_chains() {
        let (input, stages) = parse_args(&args("in.json compress --digits 2 subset --type Building --type Road save out.json")).unwrap();
        assert_eq!(input, "in.json");
        assert_eq!(
            stages,
            [
                Stage::Compress { digits: 2 },
                Stage::Subset(Selector::Types(vec!["Building".into(), "Road".into()])),
                Stage::Save { path: "out.json".into(), pretty: false },
            ]
        );
        let (_, s) = parse_args(&args("a merge b.json c.json --policy suffix partition --random 4 --seed 9")).unwrap();
        assert_eq!(
            s[1],
            Stage::Partition {
                strategy: PartitionStrategy::Random { k: 4, seed: 9 },
                out_dir: None,
                stem: None
            }
        );
        // a flag value may look like a stage name
        let (_, s) = parse_args(&args("a subset --id info")).unwrap();
        assert_eq!(s, [Stage::Subset(Selector::Ids(vec!["info".into()]))]);
    }

    #[test]
    fn usage_errors() {
        for bad in [
            "in.json",
            "in.json frobnicate",
            "in.json compress --digits x",
            "in.json subset",
            "in.json subset --id a --type Building",
            "in.json partition --grid 3",
            "in.json save - --pretty",
            "in.json dedupe --tolerance -1",
            "in.json clean --force",
        ] {
            assert!(matches!(parse_args(&args(bad)), Err(Failure::Usage(_))), "{bad}");
        }
    }
}
