use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Flat `key = value` document.
#[derive(Clone, Debug, Default)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    /// Numbers are written with 17 significant digits.
    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.text(key, fmt_f64(value));
    }

    pub fn extend(&mut self, kv: impl IntoIterator<Item = (String, String)>) {
        self.entries.extend(kv);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            // values never span lines
            let _ = writeln!(s, "{k} = {}", v.replace('\n', " "));
        }
        s
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Files produced by a run, written together once the run is over.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, String)>,
}

impl Artifacts {
    pub fn add(&mut self, dir: &Path, name: String, contents: String) {
        self.files.push((dir.join(name), contents));
    }

    pub fn write(&self) -> std::io::Result<()> {
        for (path, contents) in &self.files {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, contents)?;
        }
        Ok(())
    }
}

pub fn csv(rows: impl IntoIterator<Item = (f64, f64, f64)>) -> String {
    let mut s = String::from("x,y,U\n");
    for (x, y, u) in rows {
        let _ = writeln!(s, "{},{},{}", fmt_f64(x), fmt_f64(y), fmt_f64(u));
    }
    s
}

pub fn plot_script(csv_names: &[String]) -> String {
    let mut s = String::from(
        "import matplotlib.pyplot as plt\nimport numpy as np\n\nfig, ax = plt.subplots()\n",
    );
    for name in csv_names {
        let _ = writeln!(
            s,
            "d = np.loadtxt(\"{name}\", delimiter=\",\", skiprows=1)\nsc = ax.tricontourf(d[:, 0], d[:, 1], d[:, 2], 40)"
        );
    }
    s.push_str("fig.colorbar(sc)\nax.set_xlabel(\"x\")\nax.set_ylabel(\"y\")\nax.set_aspect(\"equal\")\nplt.show()\n");
    s
}
