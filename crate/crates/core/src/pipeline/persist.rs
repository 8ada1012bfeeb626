//! Plain-text network files:
//!
//! ```text
//! DECOUPLENET v1
//! <d> <d'> <h1,h2,...> <hidden activation> <output activation>
//! <layer 1 weights, row-major, space separated>
//! <layer 1 biases>
//! ...
//! ```

use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::net::{Layer, NetConfig, NetWeights};

pub const NET_MAGIC: &str = "DECOUPLENET v1";

fn join(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn net_to_string(net: &NetWeights) -> String {
    let c = net.config();
    let hidden: Vec<String> = c.hidden.iter().map(|h| h.to_string()).collect();
    let mut s = format!(
        "{NET_MAGIC}\n{} {} {} {} {}\n",
        c.input_dim,
        c.output_dim,
        hidden.join(","),
        c.hidden_activation,
        c.output_activation
    );
    for l in net.layers() {
        s.push_str(&join(l.w.iter().copied()));
        s.push('\n');
        s.push_str(&join(l.b.iter().copied()));
        s.push('\n');
    }
    s
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn parse_reals(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let v = line
        .split_ascii_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| bad(format!("{what}: '{t}' is not a number"))))
        .collect::<Result<Vec<f64>>>()?;
    if v.len() != expected {
        return Err(bad(format!("{what}: expected {expected} values, found {}", v.len())));
    }
    Ok(v)
}

pub fn net_from_str(text: &str) -> Result<NetWeights> {
    let mut lines = text.lines();
    match lines.next() {
        Some(NET_MAGIC) => {}
        Some(other) => return Err(bad(format!("unrecognized header '{other}', expected '{NET_MAGIC}'"))),
        None => return Err(bad("empty network file")),
    }
    let cfg_line = lines.next().ok_or_else(|| bad("missing configuration line"))?;
    let parts: Vec<&str> = cfg_line.split_ascii_whitespace().collect();
    if parts.len() != 5 {
        return Err(bad(format!("configuration line needs 5 fields, found {}", parts.len())));
    }
    let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| bad(format!("bad {what} '{s}'")));
    let hidden = parts[2]
        .split(',')
        .map(|h| num(h, "hidden size"))
        .collect::<Result<Vec<usize>>>()?;
    let config = NetConfig {
        input_dim: num(parts[0], "input dimension")?,
        output_dim: num(parts[1], "output dimension")?,
        hidden,
        hidden_activation: parts[3].parse().map_err(|e: Error| bad(e.to_string()))?,
        output_activation: parts[4].parse().map_err(|e: Error| bad(e.to_string()))?,
    };
    config.validate().map_err(|e| bad(e.to_string()))?;
    let mut layers = Vec::new();
    for (k, (fan_in, fan_out)) in config.layer_shapes().into_iter().enumerate() {
        let wl = lines.next().ok_or_else(|| bad(format!("missing weights of layer {}", k + 1)))?;
        let w = parse_reals(wl, fan_in * fan_out, &format!("layer {} weights", k + 1))?;
        let bl = lines.next().ok_or_else(|| bad(format!("missing biases of layer {}", k + 1)))?;
        let b = parse_reals(bl, fan_out, &format!("layer {} biases", k + 1))?;
        layers.push(Layer {
            w: Array2::from_shape_vec((fan_out, fan_in), w).expect("length checked"),
            b: Array1::from_vec(b),
        });
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(bad("trailing content after the last layer"));
    }
    NetWeights::from_layers(config, layers).map_err(|e| bad(e.to_string()))
}

pub fn save_net(net: &NetWeights, path: &Path) -> Result<()> {
    write_atomic(path, net_to_string(net).as_bytes())
}

pub fn load_net(path: &Path) -> Result<NetWeights> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    net_from_str(&text)
}
