//! Text form for sentences.
//!
//! ```text
//! sentence := (exists SYM formula) | formula
//! formula  := true | false | (acl TERM (TERM*)) | (= TERM TERM)
//!           | (not formula) | (and formula*) | (or formula*)
//! TERM     := the bound symbol | ?name | element
//! ```
//!
//! Elements are expressions over the spec's labels, written bare when they
//! contain no spaces, parentheses or quotes and in double quotes otherwise.

use super::{Formula, Sentence, Term};
use crate::error::{Error, Result};
use crate::pregeometry::ExtensionSpec;
use crate::QFunc;

#[derive(Clone, Debug, PartialEq)]
enum Sx {
    Atom(String, usize),
    Quoted(String, usize),
    List(Vec<Sx>, usize),
}

impl Sx {
    fn pos(&self) -> usize {
        match self {
            Sx::Atom(_, p) | Sx::Quoted(_, p) | Sx::List(_, p) => *p,
        }
    }
}

fn tokenize(src: &str) -> Result<Sx> {
    let mut stack: Vec<(Vec<Sx>, usize)> = Vec::new();
    let mut done: Option<Sx> = None;
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let mut push = |sx: Sx, stack: &mut Vec<(Vec<Sx>, usize)>| -> Result<()> {
        match stack.last_mut() {
            Some((items, _)) => items.push(sx),
            None if done.is_none() => done = Some(sx),
            None => return Err(Error::parse(sx.pos(), "trailing input")),
        }
        Ok(())
    };
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                stack.push((Vec::new(), pos));
                i += 1;
            }
            ')' => {
                let (items, start) = stack.pop().ok_or_else(|| Error::parse(pos, "unbalanced `)`"))?;
                push(Sx::List(items, start), &mut stack)?;
                i += 1;
            }
            '"' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].1 != '"' {
                    j += 1;
                }
                if j == bytes.len() {
                    return Err(Error::parse(pos, "unterminated string"));
                }
                let text: String = bytes[i + 1..j].iter().map(|&(_, c)| c).collect();
                push(Sx::Quoted(text, pos), &mut stack)?;
                i = j + 1;
            }
            _ => {
                let mut j = i;
                while j < bytes.len() && !matches!(bytes[j].1, '(' | ')' | '"') && !bytes[j].1.is_whitespace() {
                    j += 1;
                }
                let text: String = bytes[i..j].iter().map(|&(_, c)| c).collect();
                push(Sx::Atom(text, pos), &mut stack)?;
                i = j;
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(Error::parse(*start, "unbalanced `(`"));
    }
    done.ok_or_else(|| Error::parse(0, "empty input"))
}

struct Reader<'a> {
    spec: &'a ExtensionSpec,
    bound: Option<String>,
}

impl Reader<'_> {
    fn term(&self, sx: &Sx) -> Result<Term> {
        let elem = |text: &str, pos: usize| {
            self.spec
                .parse(text)
                .map(Term::Elem)
                .map_err(|e| Error::parse(pos, format!("bad element `{text}`: {e}")))
        };
        match sx {
            Sx::Atom(a, _) if Some(a) == self.bound.as_ref() => Ok(Term::Sym(a.clone())),
            Sx::Atom(a, pos) if a.starts_with('?') => {
                if a.len() == 1 {
                    return Err(Error::parse(*pos, "empty parameter name"));
                }
                Ok(Term::Sym(a[1..].to_string()))
            }
            Sx::Atom(a, pos) | Sx::Quoted(a, pos) => elem(a, *pos),
            Sx::List(_, pos) => Err(Error::parse(*pos, "expected a term")),
        }
    }

    fn formula(&self, sx: &Sx) -> Result<Formula> {
        match sx {
            Sx::Atom(a, _) if a == "true" => Ok(Formula::True),
            Sx::Atom(a, _) if a == "false" => Ok(Formula::False),
            Sx::List(items, pos) => {
                let Some(Sx::Atom(head, _)) = items.first() else {
                    return Err(Error::parse(*pos, "expected an operator"));
                };
                let args = &items[1..];
                let arity = |n: usize| {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(Error::parse(*pos, format!("`{head}` takes {n} arguments")))
                    }
                };
                match head.as_str() {
                    "acl" => {
                        arity(2)?;
                        let Sx::List(over, _) = &args[1] else {
                            return Err(Error::parse(args[1].pos(), "expected a list of terms"));
                        };
                        Ok(Formula::Acl {
                            elem: self.term(&args[0])?,
                            over: over.iter().map(|t| self.term(t)).collect::<Result<_>>()?,
                        })
                    }
                    "=" => {
                        arity(2)?;
                        Ok(Formula::Eq(self.term(&args[0])?, self.term(&args[1])?))
                    }
                    "not" => {
                        arity(1)?;
                        Ok(Formula::not(self.formula(&args[0])?))
                    }
                    "and" => Ok(Formula::And(args.iter().map(|a| self.formula(a)).collect::<Result<_>>()?)),
                    "or" => Ok(Formula::Or(args.iter().map(|a| self.formula(a)).collect::<Result<_>>()?)),
                    other => Err(Error::parse(*pos, format!("unknown operator `{other}`"))),
                }
            }
            other => Err(Error::parse(other.pos(), "expected a formula")),
        }
    }
}

pub fn parse_sentence(spec: &ExtensionSpec, src: &str) -> Result<Sentence> {
    let sx = tokenize(src)?;
    if let Sx::List(items, pos) = &sx {
        if let Some(Sx::Atom(head, _)) = items.first() {
            if head == "exists" {
                let [_, Sx::Atom(var, _), body] = items.as_slice() else {
                    return Err(Error::parse(*pos, "expected (exists SYM formula)"));
                };
                let reader = Reader {
                    spec,
                    bound: Some(var.clone()),
                };
                return Ok(Sentence::exists(var, reader.formula(body)?));
            }
        }
    }
    let reader = Reader { spec, bound: None };
    Ok(Sentence {
        var: None,
        body: reader.formula(&sx)?,
    })
}

fn show_elem(spec: &ExtensionSpec, e: &QFunc) -> String {
    let text = spec.show(e);
    if text.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"')) {
        format!("\"{text}\"")
    } else {
        text
    }
}

fn show_term(spec: &ExtensionSpec, bound: Option<&str>, t: &Term) -> String {
    match t {
        Term::Sym(s) if Some(s.as_str()) == bound => s.clone(),
        Term::Sym(s) => format!("?{s}"),
        Term::Elem(e) => show_elem(spec, e),
    }
}

fn show_formula(spec: &ExtensionSpec, bound: Option<&str>, f: &Formula) -> String {
    let list = |head: &str, fs: &[Formula]| {
        let mut s = format!("({head}");
        for g in fs {
            s.push(' ');
            s.push_str(&show_formula(spec, bound, g));
        }
        s.push(')');
        s
    };
    match f {
        Formula::True => "true".into(),
        Formula::False => "false".into(),
        Formula::Acl { elem, over } => format!(
            "(acl {} ({}))",
            show_term(spec, bound, elem),
            over.iter().map(|t| show_term(spec, bound, t)).collect::<Vec<_>>().join(" ")
        ),
        Formula::Eq(a, b) => format!("(= {} {})", show_term(spec, bound, a), show_term(spec, bound, b)),
        Formula::Not(g) => format!("(not {})", show_formula(spec, bound, g)),
        Formula::And(fs) => list("and", fs),
        Formula::Or(fs) => list("or", fs),
    }
}

impl Sentence {
    pub fn show(&self, spec: &ExtensionSpec) -> String {
        let bound = self.var.as_deref();
        let body = show_formula(spec, bound, &self.body);
        match bound {
            Some(v) => format!("(exists {v} {body})"),
            None => body,
        }
    }
}
