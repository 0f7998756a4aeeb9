mod args;
mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use charconst::fuzz::Lemma;
use charconst::{Error, Result};
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Map, Value};

use args::{Cli, Command, CosetArgs, GammaArgs, KirillovCommand, LemmaArg};
use commands::Outcome;
use config::{default_precision, json_flag, read_file, resolve, Settings};

const SCHEMA_VERSION: u32 = 1;

const GLOBAL_KEYS: &[&str] = &["p", "precision", "group", "n", "seed"];

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::Dimension(_) | Error::InvalidGroup(_) => 2,
        _ => 1,
    }
}

fn error_json(kind: &str, detail: &str) -> Value {
    json!({ "error": { "kind": kind, "detail": detail } })
}

fn emit(v: &Value, pretty: bool) {
    let text = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", text.expect("output serializes"));
}

/// Collects the flags that were given into a settings layer.
#[derive(Default)]
struct Flags(Map<String, Value>);

impl Flags {
    fn put<T: Into<Value>>(&mut self, key: &str, v: Option<T>) {
        if let Some(v) = v {
            self.0.insert(key.into(), v.into());
        }
    }

    fn put_json(&mut self, key: &str, text: &Option<String>) -> Result<()> {
        if let Some(t) = text {
            self.0.insert(key.into(), json_flag(key, t)?);
        }
        Ok(())
    }

    fn gamma(&mut self, g: &GammaArgs) -> Result<()> {
        self.put_json("gamma", &g.gamma)?;
        self.put("extension", g.extension.clone());
        Ok(())
    }

    fn cosets(&mut self, c: &CosetArgs) -> Result<()> {
        self.put_json("x", &c.x)?;
        self.put("r", c.r.clone());
        self.put("t", c.t.clone());
        self.put("cap", c.cap);
        Ok(())
    }
}

fn lemma_of(l: LemmaArg) -> Lemma {
    match l {
        LemmaArg::Lemma32 => Lemma::Lemma32,
        LemmaArg::Lemma33 => Lemma::Lemma33,
        LemmaArg::Prop34 => Lemma::Prop34,
        LemmaArg::Deepness => Lemma::Deepness,
    }
}

fn run(cli: &Cli) -> Result<(Value, bool)> {
    let g = &cli.global;
    let mut defaults = Map::new();
    defaults.insert("precision".into(), default_precision()?.into());
    defaults.insert("group".into(), "GL".into());
    defaults.insert("seed".into(), 0.into());

    let mut flags = Flags::default();
    flags.put("p", g.p);
    flags.put("precision", g.precision);
    flags.put("group", g.group.map(|k| k.as_str()));
    flags.put("n", g.n);
    flags.put("seed", g.seed);

    let (name, extra): (&str, &[&str]) = match &cli.command {
        Command::Radius(a) => {
            flags.gamma(&a.gamma)?;
            flags.put("rho_pi", a.rho_pi.clone());
            flags.put_json("candidate", &a.candidate)?;
            ("radius", &["gamma", "extension", "rho_pi", "candidate"])
        }
        Command::Sgamma(a) => {
            flags.gamma(&a.gamma)?;
            ("sgamma", &["gamma", "extension"])
        }
        Command::Verify(a) => {
            flags.put("trials", a.trials);
            flags.put_json("x", &a.x)?;
            flags.put_json("gammas", &a.gammas)?;
            flags.put_json("depths", &a.depths)?;
            defaults.insert("trials".into(), 1000.into());
            defaults.insert("depths".into(), Value::Array(Vec::new()));
            ("verify", &["trials", "x", "gammas", "depths"])
        }
        Command::Kirillov(KirillovCommand::Enumerate(a)) => {
            flags.cosets(a)?;
            defaults.insert("cap".into(), charconst::kirillov::DEFAULT_ENUMERATION_CAP.into());
            ("kirillov enumerate", &["x", "r", "t", "cap"])
        }
        Command::Kirillov(KirillovCommand::CheckCor36(a)) => {
            flags.cosets(&a.cosets)?;
            flags.put_json("gamma", &a.gamma)?;
            flags.put("search_bound", a.search_bound);
            defaults.insert("cap".into(), charconst::kirillov::DEFAULT_ENUMERATION_CAP.into());
            defaults.insert("search_bound".into(), charconst::kirillov::DEFAULT_SEARCH_BOUND.into());
            ("kirillov check-cor36", &["x", "r", "t", "cap", "gamma", "search_bound"])
        }
        Command::ChevalleyCheck(a) => {
            flags.put("samples", a.samples);
            defaults.insert("samples".into(), 100.into());
            ("chevalley-check", &["samples"])
        }
    };
    let allowed: Vec<&str> = GLOBAL_KEYS.iter().chain(extra).copied().collect();
    let file = match &g.config {
        Some(path) => read_file(path)?,
        None => Map::new(),
    };
    let (settings, resolved): (Settings, _) = resolve(&allowed, defaults, file, flags.0)?;

    let Outcome { fields, failed } = match &cli.command {
        Command::Radius(_) => commands::radius(&settings)?,
        Command::Sgamma(_) => commands::sgamma(&settings)?,
        Command::Verify(a) => commands::verify(&settings, lemma_of(a.lemma), a.timing)?,
        Command::Kirillov(KirillovCommand::Enumerate(_)) => commands::kirillov_enumerate(&settings)?,
        Command::Kirillov(KirillovCommand::CheckCor36(_)) => commands::kirillov_check_cor36(&settings)?,
        Command::ChevalleyCheck(_) => commands::chevalley_check(&settings)?,
    };
    let mut out = Map::new();
    out.insert("schema_version".into(), SCHEMA_VERSION.into());
    out.insert("command".into(), name.into());
    out.insert("config".into(), Value::Object(resolved));
    out.extend(fields);
    Ok((Value::Object(out), failed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let detail = e.render().to_string();
            let first = detail.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            emit(&error_json("Usage", &first), false);
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok((v, failed)) => {
            emit(&v, cli.global.pretty);
            if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            emit(&error_json(e.kind(), &e.to_string()), cli.global.pretty);
            ExitCode::from(exit_code(&e))
        }
    }
}
