use super::Formula;

pub(super) fn render(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

fn write(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom(sym, args) => {
            out.push_str(sym);
            out.push('(');
            for (i, v) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&v.to_string());
            }
            out.push(')');
        }
        Formula::Eq(a, b) => {
            out.push_str(&format!("eq({a},{b})"));
        }
        Formula::Not(g) => {
            out.push('!');
            write(g, out);
        }
        Formula::And(gs) => write_chain(gs, " & ", out),
        Formula::Or(gs) => write_chain(gs, " | ", out),
        Formula::Implies(a, b) => {
            out.push('(');
            write(a, out);
            out.push_str(" -> ");
            write(b, out);
            out.push(')');
        }
        Formula::Exists(v, g) => {
            out.push_str(&format!("exists {v}."));
            write(g, out);
        }
        Formula::Forall(v, g) => {
            out.push_str(&format!("forall {v}."));
            write(g, out);
        }
    }
}

// n-ary connectives print right-nested: (a & (b & c)).
fn write_chain(gs: &[Formula], op: &str, out: &mut String) {
    match gs {
        [] => out.push_str(if op == " & " { "true" } else { "false" }),
        [only] => write(only, out),
        [first, rest @ ..] => {
            out.push('(');
            write(first, out);
            out.push_str(op);
            write_chain(rest, op, out);
            out.push(')');
        }
    }
}
