use crate::args::*;
use crate::io::{load, CliError, InputDigest, Loaded, Manifest, Outputs};
use serde::Serialize;
use std::io::{self, Write};
use std::path::Path;
use tagevo::community::{
    core_periphery_report, detect_communities, filter_active_users, modularity, novelty_rates, user_profiles,
    CommunityError, SimilarityNetwork, UserDistances, UserProfile,
};
use tagevo::ingest::{write_cache, write_tsv, CorpusMeta, ParseReport};
use tagevo::novelty::{
    dictionary_growth, heaps_fit, pair_birth_matrix, pairwise_novelty_series, single_novelty_series, zipf_fit,
    HeapsOptions, PairBirthOptions, ZipfOptions,
};
use tagevo::semshift::{
    classify_drift, consecutive_jsd, drift_for_tags, jsd_matrix, top_tags, DriftRule, ProfileOptions,
};
use tagevo::ysmodel::{generate_sequence, generate_set_sequence, to_corpus, SetSize, UserAssignment, YsConfig};
use tagevo::{BucketWidth, Corpus, TagId};

/// Where a run's files go and what its manifest says.
pub struct Run<'a> {
    pub subcommand: &'a str,
    pub config_file: Option<String>,
    pub config: serde_json::Value,
}

impl Run<'_> {
    fn manifest(&self, out: &mut Outputs, name: &str, inputs: Vec<InputDigest>, report: Option<&ParseReport>) -> Result<(), CliError> {
        let manifest = Manifest {
            tool: "tagevo",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            config_file: self.config_file.clone(),
            config: self.config.clone(),
            inputs,
            outputs: out.names(),
            parse_report: report,
        };
        out.json(name, &manifest)
    }

    fn finish(&self, out: &mut Outputs, loaded: &Loaded) -> Result<(), CliError> {
        self.manifest(out, &format!("{}.manifest.json", self.subcommand), vec![loaded.digest.clone()], loaded.report.as_ref())
    }
}

fn bucket_start(corpus: &Corpus, bucket: u32, width: BucketWidth) -> i64 {
    corpus.epoch() + bucket as i64 * width.seconds() as i64
}

fn nonempty(loaded: Loaded) -> Result<Loaded, CliError> {
    if loaded.corpus.is_empty() {
        Err(CliError::Input(format!("{} contains no usable posts", loaded.digest.path)))
    } else {
        Ok(loaded)
    }
}

/// Writes to `path`, or stdout for `-`; file targets also get `<path>.manifest.json`.
fn emit(
    run: &Run,
    path: &str,
    out: &mut Option<Outputs>,
    inputs: Vec<InputDigest>,
    report: Option<&ParseReport>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    if path == "-" {
        let stdout = io::stdout();
        let mut w = io::BufWriter::new(stdout.lock());
        return f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::Output(format!("stdout: {e}")));
    }
    let p = Path::new(path);
    let name = p
        .file_name()
        .ok_or_else(|| CliError::Config(format!("output `{path}` is not a file name")))?
        .to_string_lossy()
        .into_owned();
    let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let outputs = out.insert(Outputs::new(dir)?);
    outputs.write_with(&name, f)?;
    run.manifest(outputs, &format!("{name}.manifest.json"), inputs, report)
}

fn parse_set_size(s: &str) -> Result<SetSize, CliError> {
    let bad = || CliError::Config(format!("invalid --set-size `{s}` (N or size:weight,...)"));
    if !s.contains(':') {
        return s.trim().parse().map(SetSize::Constant).map_err(|_| bad());
    }
    s.split(',')
        .map(|part| {
            let (k, w) = part.split_once(':').ok_or_else(bad)?;
            Ok((k.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(SetSize::Histogram)
}

pub fn simulate(run: &Run, a: &SimulateArgs, out: &mut Option<Outputs>) -> Result<(), CliError> {
    let config_err = |e: tagevo::ysmodel::YsError| CliError::Config(e.to_string());
    let posts = match a.process {
        Process::Single => generate_sequence(&YsConfig::single(a.alpha, a.steps, a.seed)).map_err(config_err)?.into_posts(),
        Process::Set => {
            let cfg = YsConfig {
                alpha: a.alpha,
                steps: a.steps,
                set_size: parse_set_size(&a.set_size)?,
                seed: a.seed,
                distinct_within_set: !a.allow_repeats,
                max_redraws: a.max_redraws,
            };
            generate_set_sequence(&cfg).map_err(config_err)?.posts
        }
    };
    let users = if a.users > 1 { UserAssignment::RoundRobin(a.users) } else { UserAssignment::Single };
    let corpus = to_corpus(&posts, users, BucketWidth::Week);
    emit(run, &a.output, out, Vec::new(), None, |w| write_tsv(&corpus, w))
}

pub fn ingest(run: &Run, a: &IngestArgs, out: &mut Option<Outputs>) -> Result<(), CliError> {
    let loaded = load(&a.input, a.width)?;
    let corpus = loaded.corpus.clone().with_width(a.width);
    if let Some(r) = &loaded.report {
        if r.rows_skipped() > 0 {
            eprintln!("tagevo: skipped {} of {} rows", r.rows_skipped(), r.rows_read);
        }
    }
    emit(run, &a.output, out, vec![loaded.digest.clone()], loaded.report.as_ref(), |w| write_cache(&corpus, w))?;
    if let Some(o) = out {
        o.json(&format!("{}.meta.json", Path::new(&a.output).file_name().unwrap().to_string_lossy()), &CorpusMeta::of(&corpus))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PostsRow {
    bucket: u32,
    start: i64,
    posts: u64,
    cumulative: u64,
}

pub fn posts(run: &Run, a: &AnalysisArgs, out: &mut Outputs) -> Result<(), CliError> {
    let loaded = nonempty(load(&a.input, a.width)?)?;
    let c = &loaded.corpus;
    let s = c.bucket_series(a.width);
    let rows: Vec<PostsRow> = s
        .counts
        .iter()
        .zip(&s.cumulative)
        .enumerate()
        .map(|(b, (&posts, &cumulative))| PostsRow { bucket: b as u32, start: bucket_start(c, b as u32, a.width), posts, cumulative })
        .collect();
    out.table("posts", a.output.format, &rows)?;
    run.finish(out, &loaded)
}

#[derive(Serialize)]
struct NoveltyRow {
    bucket: u32,
    start: i64,
    posts: u64,
    novel_posts: u64,
    new_tags: u64,
    proportion: f64,
}

#[derive(Serialize)]
struct GrowthRow {
    annotations: u64,
    distinct_tags: u64,
}

#[derive(Serialize)]
struct RankRow {
    rank: u64,
    frequency: u64,
}

#[derive(Serialize)]
struct ZipfSummary {
    exponent: Option<f64>,
    stderr: Option<f64>,
    f_min: u64,
    tail_tags: usize,
    ks_distance: Option<f64>,
    low_confidence: bool,
    poor_fit: bool,
}

#[derive(Serialize)]
struct NoveltySummary {
    posts: usize,
    annotations: usize,
    distinct_tags: usize,
    heaps: Option<tagevo::novelty::HeapsFit>,
    zipf: ZipfSummary,
}

pub fn novelty(run: &Run, a: &NoveltyArgs, out: &mut Outputs) -> Result<(), CliError> {
    let common = &a.common;
    let loaded = nonempty(load(&common.input, common.width)?)?;
    let c = &loaded.corpus;
    let rows: Vec<NoveltyRow> = single_novelty_series(c, common.width)
        .buckets
        .iter()
        .map(|b| NoveltyRow {
            bucket: b.bucket,
            start: bucket_start(c, b.bucket, common.width),
            posts: b.posts,
            novel_posts: b.novel_posts,
            new_tags: b.new_tags,
            proportion: b.proportion,
        })
        .collect();
    out.table("novelty", common.output.format, &rows)?;

    let heaps_opts = HeapsOptions { skip_fraction: a.heaps_skip, ..HeapsOptions::default() };
    let growth: Vec<GrowthRow> = dictionary_growth(c, heaps_opts.points_per_decade)
        .into_iter()
        .map(|(annotations, distinct_tags)| GrowthRow { annotations, distinct_tags })
        .collect();
    out.table("novelty-growth", common.output.format, &growth)?;
    let zipf = zipf_fit(c, &ZipfOptions { f_min: a.f_min, ..ZipfOptions::default() });
    let ranks: Vec<RankRow> = zipf.rank_frequency.iter().map(|&(rank, frequency)| RankRow { rank, frequency }).collect();
    out.table("novelty-rank-frequency", common.output.format, &ranks)?;
    let summary = NoveltySummary {
        posts: c.posts().len(),
        annotations: c.annotation_count(),
        distinct_tags: c.tags().len(),
        heaps: heaps_fit(c, &heaps_opts).ok(),
        zipf: ZipfSummary {
            exponent: zipf.exponent,
            stderr: zipf.stderr,
            f_min: zipf.f_min,
            tail_tags: zipf.tail_tags,
            ks_distance: zipf.ks_distance,
            low_confidence: zipf.low_confidence,
            poor_fit: zipf.poor_fit,
        },
    };
    out.json("novelty.summary.json", &summary)?;
    run.finish(out, &loaded)
}

#[derive(Serialize)]
struct PairsRow {
    bucket: u32,
    start: i64,
    posts: u64,
    pairs: u64,
    novel_pairs: u64,
    proportion: f64,
}

pub fn pairs(run: &Run, a: &AnalysisArgs, out: &mut Outputs) -> Result<(), CliError> {
    let loaded = nonempty(load(&a.input, a.width)?)?;
    let c = &loaded.corpus;
    let rows: Vec<PairsRow> = pairwise_novelty_series(c, a.width)
        .buckets
        .iter()
        .map(|b| PairsRow {
            bucket: b.bucket,
            start: bucket_start(c, b.bucket, a.width),
            posts: b.posts,
            pairs: b.pairs,
            novel_pairs: b.novel_pairs,
            proportion: b.proportion,
        })
        .collect();
    out.table("pairs", a.output.format, &rows)?;
    run.finish(out, &loaded)
}

#[derive(Serialize)]
struct CellRow {
    birth_y: u32,
    birth_x: u32,
    probability: f64,
}

#[derive(Serialize)]
struct BirthSummary {
    size: usize,
    events: u64,
    co_usages: u64,
    window: Option<(u32, u32)>,
}

fn parse_window(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Config(format!("invalid --window `{s}` (start:end in buckets)"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let (lo, hi): (u32, u32) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn birthmatrix(run: &Run, a: &BirthArgs, out: &mut Outputs) -> Result<(), CliError> {
    let window = a.window.as_deref().map(parse_window).transpose()?;
    let common = &a.common;
    let loaded = nonempty(load(&common.input, common.width)?)?;
    let opts = PairBirthOptions {
        width: common.width,
        window: window.map(|(lo, hi)| lo..hi),
        normalization: a.normalization.into(),
    };
    let m = pair_birth_matrix(&loaded.corpus, &opts);
    let rows: Vec<CellRow> =
        m.nonzero().map(|((birth_y, birth_x), probability)| CellRow { birth_y, birth_x, probability }).collect();
    out.table("birthmatrix", common.output.format, &rows)?;
    out.json("birthmatrix.summary.json", &BirthSummary { size: m.size, events: m.events, co_usages: m.co_usages, window })?;
    run.finish(out, &loaded)
}

fn profile_options(p: &ProfileArgs, width: BucketWidth) -> Result<ProfileOptions, CliError> {
    if !(0.0..1.0).contains(&p.min_share) {
        return Err(CliError::Config(format!("--min-share must be in [0, 1), got {}", p.min_share)));
    }
    Ok(ProfileOptions { min_share: p.min_share, weighting: p.weighting.into(), width })
}

fn find_tag(c: &Corpus, input: &InputArgs, name: &str) -> Result<TagId, CliError> {
    let opts = input.parse_options(c.width()).map_err(CliError::Config)?;
    let key = tagevo::ingest::normalize_tag(name.as_bytes(), opts.normalization)
        .ok()
        .flatten()
        .unwrap_or_else(|| name.to_string());
    c.tags().id(&key).ok_or_else(|| CliError::Input(format!("tag `{name}` does not occur in the input")))
}

#[derive(Serialize)]
struct MatrixJson<'a> {
    tag: &'a str,
    weeks: &'a [u32],
    excluded_weeks: &'a [u32],
    values: Vec<&'a [f64]>,
}

pub fn jsd_matrix_cmd(run: &Run, a: &TagArgs, out: &mut Outputs) -> Result<(), CliError> {
    let common = &a.common;
    let loaded = nonempty(load(&common.input, common.width)?)?;
    let c = &loaded.corpus;
    let tag = find_tag(c, &common.input, &a.tag)?;
    let m = jsd_matrix(c, tag, &profile_options(&a.profile, common.width)?).map_err(|e| CliError::Input(e.to_string()))?;
    match common.output.format {
        Format::Csv => out.write_with("jsd-matrix.csv", |w| {
            let mut csv = csv::Writer::from_writer(w);
            let header: Vec<String> = std::iter::once("week".to_string()).chain(m.weeks.iter().map(u32::to_string)).collect();
            csv.write_record(&header)?;
            for (week, row) in m.weeks.iter().zip(m.rows()) {
                csv.write_record(std::iter::once(week.to_string()).chain(row.iter().map(f64::to_string)))?;
            }
            csv.flush()
        })?,
        Format::Json => out.json(
            "jsd-matrix.json",
            &MatrixJson { tag: c.tags().name(tag), weeks: &m.weeks, excluded_weeks: &m.excluded_weeks, values: m.rows().collect() },
        )?,
    }
    run.finish(out, &loaded)
}

#[derive(Serialize)]
struct ConsecRow<'a> {
    tag: &'a str,
    from_week: u32,
    to_week: u32,
    jsd: f64,
    gap: bool,
}

pub fn jsd_consec(run: &Run, a: &TagArgs, out: &mut Outputs) -> Result<(), CliError> {
    let common = &a.common;
    let loaded = nonempty(load(&common.input, common.width)?)?;
    let c = &loaded.corpus;
    let tag = find_tag(c, &common.input, &a.tag)?;
    let s = consecutive_jsd(c, tag, &profile_options(&a.profile, common.width)?).map_err(|e| CliError::Input(e.to_string()))?;
    let name = c.tags().name(tag);
    let rows: Vec<ConsecRow> = s
        .points
        .iter()
        .map(|p| ConsecRow { tag: name, from_week: p.from_week, to_week: p.to_week, jsd: p.jsd, gap: p.gap })
        .collect();
    out.table("jsd-consec", common.output.format, &rows)?;
    out.json("jsd-consec.summary.json", &serde_json::json!({
        "tag": name,
        "excluded_weeks": s.excluded_weeks,
        "drift": classify_drift(&s.values(), &DriftRule::default()),
    }))?;
    run.finish(out, &loaded)
}

#[derive(Serialize)]
struct DriftRow<'a> {
    tag: &'a str,
    class: tagevo::semshift::DriftClass,
    points: usize,
    trailing_mean: Option<f64>,
    trailing_spikes: usize,
    total_spikes: usize,
}

pub fn drift(run: &Run, a: &DriftArgs, out: &mut Outputs) -> Result<(), CliError> {
    if !(a.drift_threshold > 0.0) || a.drift_window == 0 {
        return Err(CliError::Config("--drift-window must be ≥ 1 and --drift-threshold > 0".into()));
    }
    let common = &a.common;
    let loaded = nonempty(load(&common.input, common.width)?)?;
    let c = &loaded.corpus;
    let tags = if a.tag.is_empty() {
        top_tags(c, a.top)
    } else {
        a.tag.iter().map(|t| find_tag(c, &common.input, t)).collect::<Result<_, _>>()?
    };
    let rule = DriftRule { window: a.drift_window, threshold: a.drift_threshold };
    let results = drift_for_tags(c, &tags, &profile_options(&a.profile, common.width)?, &rule);
    let rows: Vec<DriftRow> = results
        .iter()
        .map(|d| DriftRow {
            tag: c.tags().name(d.tag),
            class: d.report.class,
            points: d.series.as_ref().map_or(0, |s| s.points.len()),
            trailing_mean: d.report.trailing_mean,
            trailing_spikes: d.report.trailing_spikes,
            total_spikes: d.report.total_spikes,
        })
        .collect();
    out.table("drift", common.output.format, &rows)?;
    let series: Vec<ConsecRow> = results
        .iter()
        .flat_map(|d| {
            let name = c.tags().name(d.tag);
            d.series.iter().flat_map(move |s| {
                s.points.iter().map(move |p| ConsecRow { tag: name, from_week: p.from_week, to_week: p.to_week, jsd: p.jsd, gap: p.gap })
            })
        })
        .collect();
    out.table("drift-series", common.output.format, &series)?;
    run.finish(out, &loaded)
}

struct UserData {
    profiles: Vec<UserProfile>,
    distances: UserDistances,
}

fn user_data(c: &Corpus, u: &UserArgs) -> Result<UserData, CliError> {
    let active = filter_active_users(c, u.min_posts.max(1));
    if active.len() < 2 {
        return Err(CliError::Input(format!(
            "{} user(s) with at least {} posts; a network needs 2",
            active.len(),
            u.min_posts
        )));
    }
    let profiles = user_profiles(c, &active, &novelty_rates(c, u.adoption_threshold));
    let distances = UserDistances::compute(&profiles);
    Ok(UserData { profiles, distances })
}

fn check_thresholds(ts: &[f64]) -> Result<(), CliError> {
    match ts.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        Some(t) => Err(CliError::Config(format!("threshold {t} outside (0, 1]"))),
        None if ts.is_empty() => Err(CliError::Config("no thresholds given".into())),
        None => Ok(()),
    }
}

fn network(data: &UserData, t: f64, drop_isolated: bool) -> SimilarityNetwork {
    let net = data.distances.network(t);
    if drop_isolated {
        net.without_isolated()
    } else {
        net
    }
}

#[derive(Serialize)]
struct EdgeRow<'a> {
    user_a: &'a str,
    user_b: &'a str,
    jsd: f64,
}

fn edge_rows<'a>(c: &'a Corpus, net: &SimilarityNetwork) -> Vec<EdgeRow<'a>> {
    net.graph
        .edges()
        .iter()
        .zip(&net.edge_jsd)
        .map(|(&(a, b), &jsd)| EdgeRow { user_a: c.user_name(net.users[a]), user_b: c.user_name(net.users[b]), jsd })
        .collect()
}

#[derive(Serialize)]
struct NetSummary {
    threshold: f64,
    nodes: usize,
    edges: usize,
    isolated: usize,
}

pub fn usernet(run: &Run, a: &UserNetArgs, out: &mut Outputs) -> Result<(), CliError> {
    check_thresholds(&a.thresholds)?;
    let common = &a.common;
    let loaded = nonempty(load(&common.input, common.width)?)?;
    let c = &loaded.corpus;
    let data = user_data(c, &a.users)?;
    let mut summary = Vec::new();
    for &t in &a.thresholds {
        let net = network(&data, t, a.drop_isolated);
        out.table(&format!("usernet-{t}.edges"), common.output.format, &edge_rows(c, &net))?;
        summary.push(NetSummary {
            threshold: t,
            nodes: net.graph.node_count(),
            edges: net.graph.edge_count(),
            isolated: net.graph.node_count() - net.connected_nodes().len(),
        });
    }
    out.json("usernet.summary.json", &summary)?;
    run.finish(out, &loaded)
}

#[derive(Serialize)]
struct NodeRow<'a> {
    user: &'a str,
    posts: u64,
    degree: usize,
    core: u32,
    community: Option<usize>,
    novelty_rate: u64,
}

#[derive(Serialize)]
struct CommunitySummary {
    threshold: f64,
    nodes: usize,
    edges: usize,
    communities: Option<usize>,
    modularity: Option<f64>,
    coreness_correlation: f64,
    degree_correlation: f64,
}

pub fn communities(run: &Run, a: &CommunityArgs, out: &mut Outputs) -> Result<(), CliError> {
    let n = &a.net;
    check_thresholds(&n.thresholds)?;
    let loaded = nonempty(load(&n.common.input, n.common.width)?)?;
    let c = &loaded.corpus;
    let data = user_data(c, &n.users)?;
    let by_user: std::collections::HashMap<_, _> = data.profiles.iter().map(|p| (p.user, p)).collect();
    let format = n.common.output.format;
    let mut summary = Vec::new();
    for &t in &n.thresholds {
        let net = network(&data, t, n.drop_isolated);
        let partition = match detect_communities(&net.graph, a.seed) {
            Ok(p) => {
                let q = modularity(&net.graph, &p.labels).map_err(|e| CliError::Internal(e.to_string()))?;
                if (q - p.modularity).abs() > 1e-9 {
                    return Err(CliError::Internal(format!("modularity {q} disagrees with detected {}", p.modularity)));
                }
                Some(p)
            }
            Err(CommunityError::NoEdges) => None,
            Err(e) => return Err(CliError::Internal(e.to_string())),
        };
        let rates: Vec<u64> = net.users.iter().map(|u| by_user[u].novelty_rate).collect();
        let report = core_periphery_report(&net.graph, partition.as_ref().map(|p| p.labels.as_slice()), &rates);
        let nodes: Vec<NodeRow> = report
            .nodes
            .iter()
            .map(|r| NodeRow {
                user: c.user_name(net.users[r.node]),
                posts: by_user[&net.users[r.node]].posts,
                degree: r.degree,
                core: r.core,
                community: r.community,
                novelty_rate: r.novelty_rate,
            })
            .collect();
        out.table(&format!("communities-{t}.nodes"), format, &nodes)?;
        out.table(&format!("communities-{t}.edges"), format, &edge_rows(c, &net))?;
        summary.push(CommunitySummary {
            threshold: t,
            nodes: net.graph.node_count(),
            edges: net.graph.edge_count(),
            communities: partition.as_ref().map(|p| p.communities),
            modularity: partition.as_ref().map(|p| p.modularity),
            coreness_correlation: report.coreness_correlation,
            degree_correlation: report.degree_correlation,
        });
    }
    out.json("communities.summary.json", &summary)?;
    run.finish(out, &loaded)
}

#[derive(Serialize)]
struct UserRateRow<'a> {
    user: &'a str,
    posts: u64,
    novelty_rate: u64,
}

pub fn novelty_users(run: &Run, a: &NoveltyUsersArgs, out: &mut Outputs) -> Result<(), CliError> {
    let common = &a.common;
    let loaded = nonempty(load(&common.input, common.width)?)?;
    let c = &loaded.corpus;
    let rates = novelty_rates(c, a.users.adoption_threshold);
    let active = filter_active_users(c, a.users.min_posts.max(1));
    let rows: Vec<UserRateRow> = active
        .iter()
        .map(|&(u, posts)| UserRateRow { user: c.user_name(u), posts, novelty_rate: rates[u.index()] })
        .collect();
    out.table("novelty-users", common.output.format, &rows)?;
    out.json("novelty-users.summary.json", &serde_json::json!({
        "users": c.users().len(),
        "active_users": active.len(),
        "adopted_tags": rates.iter().sum::<u64>(),
        "adoption_threshold": a.users.adoption_threshold,
    }))?;
    run.finish(out, &loaded)
}
