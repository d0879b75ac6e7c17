//! JSON game file format.
//!
//! ```json
//! {
//!   "players": 2,
//!   "action_counts": [2, 2],
//!   "action_labels": [["A", "B"], ["a", "b"]],
//!   "payoffs": [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]
//! }
//! ```
//!
//! `payoffs[i]` is player `i`'s tensor, nested with player 0 outermost.
//! Entries are JSON integers, decimal numbers, or strings `"p/q"`, `"p"`
//! or `"1.25"`; all of them are converted to exact rationals. Output uses
//! integers where possible and `"p/q"` strings otherwise.

use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::game::{Game, Limits, Payoff};

/// Parses an exact rational from `p/q`, an integer, or a finite decimal with optional exponent.
pub fn parse_rational(text: &str) -> std::result::Result<Payoff, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {text:?}"))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {text:?}"))?;
        if d == 0 {
            return Err(format!("zero denominator in {text:?}"));
        }
        return Ok(Payoff::new(n, d));
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> std::result::Result<Payoff, String> {
    let bad = || format!("not a rational number: {text:?}");
    let overflow = || format!("{text:?} does not fit a 64-bit rational");

    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = text[pos + 1..].parse().map_err(|_| bad())?;
            (&text[..pos], e)
        }
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }

    let mut value: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add(i64::from(b - b'0')))
            .ok_or_else(overflow)?;
    }
    let scale = exponent - frac_part.len() as i32;
    let pow = 10i64
        .checked_pow(scale.unsigned_abs())
        .ok_or_else(overflow)?;
    let value = if negative { -value } else { value };
    if scale >= 0 {
        Ok(Payoff::from_integer(
            value.checked_mul(pow).ok_or_else(overflow)?,
        ))
    } else {
        Ok(Payoff::new(value, pow))
    }
}

/// Renders a rational as an integer or `"p/q"` JSON value.
pub fn rational_to_json(r: &Payoff) -> Value {
    if r.is_integer() {
        Value::from(*r.numer())
    } else {
        Value::String(format!("{}/{}", r.numer(), r.denom()))
    }
}

fn nest(values: &[Payoff], counts: &[usize]) -> Value {
    match counts.split_first() {
        None => rational_to_json(&values[0]),
        Some((&k, rest)) => {
            let chunk = values.len() / k;
            Value::Array(values.chunks(chunk).map(|c| nest(c, rest)).collect())
        }
    }
}

pub fn game_to_json(game: &Game) -> Value {
    let mut obj = Map::new();
    obj.insert("players".into(), Value::from(game.num_players()));
    obj.insert(
        "action_counts".into(),
        Value::from(game.action_counts().to_vec()),
    );
    if let Some(labels) = game.labels() {
        obj.insert("action_labels".into(), Value::from(labels.to_vec()));
    }
    let tensors = (0..game.num_players())
        .map(|i| nest(game.payoffs_of(i), game.action_counts()))
        .collect();
    obj.insert("payoffs".into(), Value::Array(tensors));
    Value::Object(obj)
}

pub fn game_to_string(game: &Game) -> String {
    serde_json::to_string_pretty(&game_to_json(game)).expect("game JSON is always serializable")
}

fn usize_field(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    obj.get(key)
        .ok_or_else(|| Error::parse(key, "missing field"))?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::parse(key, "expected a non-negative integer"))
}

fn read_entry(v: &Value, context: &str) -> Result<Payoff> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => {
            return Err(Error::parse(
                context,
                format!("expected a number or \"p/q\" string, found {other}"),
            ))
        }
    };
    parse_rational(&text).map_err(|m| Error::parse(context, m))
}

fn read_tensor(
    v: &Value,
    counts: &[usize],
    coord: &mut Vec<usize>,
    player: usize,
    out: &mut Vec<Payoff>,
) -> Result<()> {
    let context = || {
        let mut c = format!("payoffs[{player}]");
        for k in coord.iter() {
            c.push_str(&format!("[{k}]"));
        }
        c
    };
    let Some((&k, rest)) = counts.split_first() else {
        out.push(read_entry(v, &context())?);
        return Ok(());
    };
    let items = v
        .as_array()
        .ok_or_else(|| Error::parse(context(), format!("expected a list of {k} entries")))?;
    if items.len() < k {
        let mut missing = coord.clone();
        missing.push(items.len());
        missing.extend(std::iter::repeat_n(0, rest.len()));
        let coords: Vec<String> = missing.iter().map(usize::to_string).collect();
        return Err(Error::parse(
            context(),
            format!(
                "expected {k} entries, found {}; missing coordinate ({})",
                items.len(),
                coords.join(",")
            ),
        ));
    }
    if items.len() > k {
        return Err(Error::parse(
            context(),
            format!("expected {k} entries, found {}", items.len()),
        ));
    }
    for (a, item) in items.iter().enumerate() {
        coord.push(a);
        read_tensor(item, rest, coord, player, out)?;
        coord.pop();
    }
    Ok(())
}

/// Builds a game from an already-parsed JSON value.
pub fn game_from_json(value: &Value, limits: &Limits) -> Result<Game> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("<root>", "expected a JSON object"))?;
    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "players" | "action_counts" | "action_labels" | "payoffs"
        ) {
            return Err(Error::parse(key.as_str(), "unknown field"));
        }
    }
    let players = usize_field(obj, "players")?;
    if players == 0 {
        return Err(Error::parse("players", "a game needs at least one player"));
    }
    let counts: Vec<usize> = obj
        .get("action_counts")
        .ok_or_else(|| Error::parse("action_counts", "missing field"))?
        .as_array()
        .ok_or_else(|| Error::parse("action_counts", "expected a list"))?
        .iter()
        .enumerate()
        .map(|(i, v)| match v.as_u64() {
            Some(k) if k > 0 => Ok(k as usize),
            _ => Err(Error::parse(
                format!("action_counts[{i}]"),
                "expected a positive integer",
            )),
        })
        .collect::<Result<_>>()?;
    if counts.len() != players {
        return Err(Error::parse(
            "action_counts",
            format!("expected {players} entries, found {}", counts.len()),
        ));
    }
    // Reject oversized shapes before walking the tensors.
    let mut total: u128 = 1;
    for &k in &counts {
        total = total.saturating_mul(k as u128);
    }
    if total > limits.max_profiles as u128 {
        return Err(Error::resource(
            "profile count",
            total,
            limits.max_profiles as u128,
        ));
    }

    let tensors = obj
        .get("payoffs")
        .ok_or_else(|| Error::parse("payoffs", "missing field"))?
        .as_array()
        .ok_or_else(|| Error::parse("payoffs", "expected a list of tensors"))?;
    if tensors.len() != players {
        return Err(Error::parse(
            "payoffs",
            format!("expected {players} tensors, found {}", tensors.len()),
        ));
    }
    let mut payoffs = Vec::with_capacity(players);
    for (i, t) in tensors.iter().enumerate() {
        let mut out = Vec::new();
        read_tensor(t, &counts, &mut Vec::new(), i, &mut out)?;
        payoffs.push(out);
    }
    let mut game = Game::with_limits(counts.clone(), payoffs, limits)?;

    if let Some(labels) = obj.get("action_labels") {
        let lists = labels
            .as_array()
            .ok_or_else(|| Error::parse("action_labels", "expected a list of string lists"))?;
        if lists.len() != players {
            return Err(Error::parse(
                "action_labels",
                format!("expected {players} lists, found {}", lists.len()),
            ));
        }
        let mut parsed = Vec::with_capacity(players);
        for (i, list) in lists.iter().enumerate() {
            let ctx = format!("action_labels[{i}]");
            let items = list
                .as_array()
                .ok_or_else(|| Error::parse(ctx.as_str(), "expected a list of strings"))?;
            if items.len() != counts[i] {
                return Err(Error::parse(
                    ctx,
                    format!("expected {} labels, found {}", counts[i], items.len()),
                ));
            }
            let names = items
                .iter()
                .enumerate()
                .map(|(a, s)| {
                    s.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| Error::parse(format!("{ctx}[{a}]"), "expected a string"))
                })
                .collect::<Result<Vec<_>>>()?;
            parsed.push(names);
        }
        game = game.with_labels(parsed)?;
    }
    Ok(game)
}

pub fn parse_game(text: &str, limits: &Limits) -> Result<Game> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    game_from_json(&value, limits)
}

pub fn read_game_file(path: &Path, limits: &Limits) -> Result<Game> {
    let text = std::fs::read_to_string(path)?;
    parse_game(&text, limits)
}
