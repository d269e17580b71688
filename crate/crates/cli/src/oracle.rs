//! Numerical predicates answered by an external process.
//!
//! The process reads one query per line (the integer arguments separated by
//! spaces) and answers each with a line containing `1` or `0`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use focq::logic::Registry;
use focq::{Error, Result};
use num_bigint::BigInt;

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Drop for Pipe {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A running oracle process.
pub struct ProcessOracle {
    pub name: String,
    pub arity: usize,
    pub command: String,
    calls: AtomicU64,
    pipe: Mutex<Pipe>,
}

impl ProcessOracle {
    pub fn spawn(name: &str, arity: usize, command: &str) -> Result<Arc<Self>> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Input(format!("cannot start oracle `{name}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Arc::new(ProcessOracle {
            name: name.to_string(),
            arity,
            command: command.to_string(),
            calls: AtomicU64::new(0),
            pipe: Mutex::new(Pipe { child, stdin, stdout }),
        }))
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn ask(&self, args: &[BigInt]) -> Result<bool> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let line: Vec<String> = args.iter().map(BigInt::to_string).collect();
        let mut pipe = self.pipe.lock().unwrap();
        let broken = |e: std::io::Error| Error::Input(format!("oracle `{}` failed: {e}", self.name));
        writeln!(pipe.stdin, "{}", line.join(" ")).map_err(broken)?;
        pipe.stdin.flush().map_err(broken)?;
        let mut answer = String::new();
        if pipe.stdout.read_line(&mut answer).map_err(broken)? == 0 {
            return Err(Error::Input(format!("oracle `{}` closed its output", self.name)));
        }
        match answer.trim() {
            "1" => Ok(true),
            "0" => Ok(false),
            other => Err(Error::Input(format!(
                "oracle `{}` answered `{other}` to `{}`, expected 0 or 1",
                self.name,
                line.join(" ")
            ))),
        }
    }
}

/// Parses `NAME/ARITY=COMMAND`.
pub fn parse_spec(spec: &str) -> Result<(String, usize, String)> {
    let bad = || Error::Input(format!("oracle `{spec}` is not of the form NAME/ARITY=COMMAND"));
    let (head, command) = spec.split_once('=').ok_or_else(bad)?;
    let (name, arity) = head.split_once('/').ok_or_else(bad)?;
    let arity: usize = arity.trim().parse().map_err(|_| bad())?;
    let name = name.trim();
    let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid || arity == 0 || command.trim().is_empty() {
        return Err(bad());
    }
    Ok((name.to_string(), arity, command.to_string()))
}

/// The built-in predicates plus one process per spec.
pub fn registry(specs: &[String]) -> Result<(Registry, Vec<Arc<ProcessOracle>>)> {
    let mut preds = Registry::builtin();
    let mut procs = Vec::new();
    for spec in specs {
        let (name, arity, command) = parse_spec(spec)?;
        let p = ProcessOracle::spawn(&name, arity, &command)?;
        let q = Arc::clone(&p);
        preds.register(name, arity, Arc::new(move |args: &[BigInt]| q.ask(args)));
        procs.push(p);
    }
    Ok((preds, procs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs() {
        assert_eq!(
            parse_spec("even/1=./even.sh").unwrap(),
            ("even".into(), 1, "./even.sh".into())
        );
        assert!(parse_spec("even=./x").is_err());
        assert!(parse_spec("1x/1=./x").is_err());
        assert!(parse_spec("x/0=./x").is_err());
    }

    #[test]
    fn process_round_trip() {
        let script = r#"while read a; do if [ $((a % 2)) -eq 0 ]; then echo 1; else echo 0; fi; done"#;
        let p = ProcessOracle::spawn("even", 1, script).unwrap();
        assert!(p.ask(&[BigInt::from(4)]).unwrap());
        assert!(!p.ask(&[BigInt::from(7)]).unwrap());
        assert_eq!(p.calls(), 2);
        let bad = ProcessOracle::spawn("bad", 1, "while read a; do echo maybe; done").unwrap();
        assert!(bad.ask(&[BigInt::from(1)]).is_err());
    }
}
