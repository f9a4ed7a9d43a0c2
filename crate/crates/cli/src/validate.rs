use std::fs::File;
use std::io::{self, BufReader, Write};

use qsieve::quantum::{read_trace, validate_trace};
use serde_json::json;

use crate::{fail, write_json, Exit, ValidateArgs};

pub fn run(args: &ValidateArgs, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Exit> {
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return fail(
            err,
            Exit::Invalid,
            format!("invalid tolerance {}", args.tolerance),
        );
    }
    let records = match File::open(&args.path).and_then(|f| read_trace(BufReader::new(f))) {
        Ok(r) => r,
        Err(e) => {
            return fail(
                err,
                Exit::Invalid,
                format!("cannot read trace {}: {e}", args.path.display()),
            )
        }
    };
    let summaries = match validate_trace(&records, args.tolerance) {
        Ok(s) => s,
        Err(e) => {
            if args.json {
                write_json(out, &json!({"valid": false, "error": e}))?;
            }
            return fail(err, Exit::Failed, format!("invalid trace: {e}"));
        }
    };
    if args.json {
        write_json(
            out,
            &json!({"valid": true, "records": records.len(), "snapshots": summaries}),
        )?;
    } else {
        writeln!(
            out,
            "{:>7}  {:<5} {:>9} {:>9}  {:<9} weight",
            "attempt", "step", "support", "terms", "truncated"
        )?;
        for s in &summaries {
            writeln!(
                out,
                "{:>7}  {:<5} {:>9} {:>9}  {:<9} {:.12}",
                s.attempt, s.step, s.support, s.terms, s.truncated, s.weight
            )?;
        }
        writeln!(
            out,
            "trace valid: {} snapshots in {} records",
            summaries.len(),
            records.len()
        )?;
    }
    Ok(Exit::Success)
}
