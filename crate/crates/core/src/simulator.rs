//! End-to-end protocol simulation: storage encoding, randomized queries,
//! server responses and reconstruction.
//!
//! A file is a flat vector of `k * s` symbols; stripe `σ` is
//! `file[σk..(σ+1)k]`. Server `j` stores a column of length `m * s` whose
//! entry `ℓ * s + σ` is coordinate `j` of the encoded stripe `σ` of file `ℓ`.
//! Query vectors use the same indexing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::LinearCode;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::schemes::RetrievalScheme;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageSystem {
    code: LinearCode,
    stripes: usize,
    files: Vec<Vec<u32>>,
    columns: Vec<Vec<u32>>,
}

impl StorageSystem {
    pub fn field(&self) -> PrimeField {
        self.code.field()
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn n(&self) -> usize {
        self.code.len()
    }

    pub fn k(&self) -> usize {
        self.code.k()
    }

    /// Number of files `m`.
    pub fn m(&self) -> usize {
        self.files.len()
    }

    pub fn stripes(&self) -> usize {
        self.stripes
    }

    pub fn files(&self) -> &[Vec<u32>] {
        &self.files
    }

    pub fn file(&self, index: usize) -> Result<&[u32]> {
        self.files.get(index).map(Vec::as_slice).ok_or(Error::IndexOutOfRange {
            index,
            len: self.files.len(),
        })
    }

    /// Column stored by server `j`.
    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }
}

/// Encodes every stripe of every file with `code`.
pub fn encode_storage(files: &[Vec<u32>], code: &LinearCode, stripes: usize) -> Result<StorageSystem> {
    if stripes == 0 {
        return Err(Error::DimensionMismatch("at least one stripe is required".into()));
    }
    if files.is_empty() {
        return Err(Error::DimensionMismatch("at least one file is required".into()));
    }
    let f = code.field();
    let k = code.k();
    let n = code.len();
    let s = stripes;
    let mut columns = vec![vec![0u32; files.len() * s]; n];
    let mut stored = Vec::with_capacity(files.len());
    for (l, file) in files.iter().enumerate() {
        if file.len() != k * s {
            return Err(Error::DimensionMismatch(format!(
                "file {l} has {} symbols, expected k * stripes = {}",
                file.len(),
                k * s
            )));
        }
        if let Some(&bad) = file.iter().find(|&&v| v >= f.modulus()) {
            return Err(Error::DimensionMismatch(format!(
                "file {l} holds {bad}, not a residue mod {}",
                f.modulus()
            )));
        }
        for sigma in 0..s {
            let word = code.encode(&file[sigma * k..(sigma + 1) * k])?;
            for (j, &v) in word.iter().enumerate() {
                columns[j][l * s + sigma] = v;
            }
        }
        stored.push(file.clone());
    }
    Ok(StorageSystem {
        code: code.clone(),
        stripes,
        files: stored,
        columns,
    })
}

/// A coded symbol of the requested file recovered in some round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodedSymbol {
    pub block: usize,
    /// Position among the retained servers.
    pub position: usize,
    pub value: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTranscript {
    /// One query per retained server, in retained order.
    pub queries: Vec<Vec<u32>>,
    pub responses: Vec<u32>,
    pub decoded: Vec<DecodedSymbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub file_index: usize,
    pub seed: u64,
    pub retained_servers: Vec<usize>,
    pub rounds: Vec<RoundTranscript>,
    pub reconstructed: Vec<u32>,
    pub downloads: usize,
}

impl Transcript {
    pub fn decoded_symbols(&self) -> usize {
        self.rounds.iter().map(|r| r.decoded.len()).sum()
    }
}

fn check_compatible(system: &StorageSystem, scheme: &RetrievalScheme) -> Result<()> {
    if system.code() != scheme.storage_code() {
        return Err(Error::SchemeMismatch(
            "scheme was built for a different storage code".into(),
        ));
    }
    if system.stripes() != scheme.blocks() {
        return Err(Error::SchemeMismatch(format!(
            "system has {} stripes per file, scheme retrieves {} blocks",
            system.stripes(),
            scheme.blocks()
        )));
    }
    Ok(())
}

/// Draws a uniform element of `F_p`.
pub fn uniform_element<R: Rng + ?Sized>(field: PrimeField, rng: &mut R) -> u32 {
    rng.gen_range(0..field.modulus())
}

/// `m` files of `len` uniform symbols drawn from a ChaCha8 stream seeded by `seed`.
pub fn random_files(field: PrimeField, m: usize, len: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| (0..len).map(|_| uniform_element(field, &mut rng)).collect())
        .collect()
}

/// Query vectors for every round: `queries[round][position]`, each of
/// length `m * s`. One uniform codeword of the retrieval code is sampled per
/// (file, block) and round; the round's block shift is added on file `i`.
pub fn gen_queries<R: Rng + ?Sized>(
    scheme: &RetrievalScheme,
    system: &StorageSystem,
    i: usize,
    rng: &mut R,
) -> Result<Vec<Vec<Vec<u32>>>> {
    check_compatible(system, scheme)?;
    let m = system.m();
    if i >= m {
        return Err(Error::IndexOutOfRange { index: i, len: m });
    }
    let f = system.field();
    let d = scheme.retrieval_code();
    let s = system.stripes();
    let width = scheme.retained_servers().len();
    let mut all = Vec::with_capacity(scheme.rounds().len());
    for round in scheme.rounds() {
        let mut queries = vec![vec![0u32; m * s]; width];
        for l in 0..m {
            for b in 0..s {
                let msg: Vec<u32> = (0..d.k()).map(|_| uniform_element(f, rng)).collect();
                let word = d.encode(&msg)?;
                for (pos, q) in queries.iter_mut().enumerate() {
                    q[l * s + b] = word[pos];
                }
            }
        }
        for (b, support) in round.block_supports.iter().enumerate() {
            for &pos in support {
                let slot = &mut queries[pos][i * s + b];
                *slot = f.add(*slot, 1);
            }
        }
        all.push(queries);
    }
    Ok(all)
}

/// Inner product of the stored column with the query.
pub fn server_respond(field: PrimeField, column: &[u32], query: &[u32]) -> Result<u32> {
    if column.len() != query.len() {
        return Err(Error::DimensionMismatch(format!(
            "query of length {} for a column of length {}",
            query.len(),
            column.len()
        )));
    }
    Ok(field.dot(column, query))
}

/// Coded symbols leaked in one round: solves `H[:, P] z = H r` where `P`
/// are the round's injected positions.
pub fn decode_round(scheme: &RetrievalScheme, round: usize, responses: &[u32]) -> Result<Vec<DecodedSymbol>> {
    let plan = scheme.rounds().get(round).ok_or(Error::IndexOutOfRange {
        index: round,
        len: scheme.rounds().len(),
    })?;
    if responses.len() != scheme.retained_servers().len() {
        return Err(Error::DimensionMismatch(format!(
            "round {round}: {} responses for {} retained servers",
            responses.len(),
            scheme.retained_servers().len()
        )));
    }
    let labels: Vec<(usize, usize)> = plan
        .block_supports
        .iter()
        .enumerate()
        .flat_map(|(b, sup)| sup.iter().map(move |&pos| (b, pos)))
        .collect();
    if labels.is_empty() {
        return Ok(Vec::new());
    }
    let h = scheme.parity_check();
    let syndrome = h.right_mul(responses)?;
    let cols: Vec<usize> = labels.iter().map(|&(_, pos)| pos).collect();
    let z = h
        .select_columns(&cols)
        .solve_right(&syndrome)
        .ok_or_else(|| Error::SingularSystem(format!("round {round}: syndrome outside the leaked-symbol span")))?;
    Ok(labels
        .into_iter()
        .zip(z)
        .map(|((block, position), value)| DecodedSymbol { block, position, value })
        .collect())
}

/// Recovers the requested file from the responses of every round.
pub fn reconstruct(scheme: &RetrievalScheme, responses: &[Vec<u32>]) -> Result<Vec<u32>> {
    let decoded = responses
        .iter()
        .enumerate()
        .map(|(j, r)| decode_round(scheme, j, r))
        .collect::<Result<Vec<_>>>()?;
    assemble_file(scheme, &decoded)
}

fn assemble_file(scheme: &RetrievalScheme, decoded: &[Vec<DecodedSymbol>]) -> Result<Vec<u32>> {
    if decoded.len() != scheme.rounds().len() {
        return Err(Error::DimensionMismatch(format!(
            "responses for {} rounds, scheme has {}",
            decoded.len(),
            scheme.rounds().len()
        )));
    }
    // The storage generator fixes the message basis; the restricted code may be re-based.
    let g = scheme
        .storage_code()
        .generator()
        .select_columns(scheme.retained_servers());
    let k = scheme.symbols_per_block();
    let mut file = Vec::with_capacity(k * scheme.blocks());
    for b in 0..scheme.blocks() {
        let (positions, values): (Vec<usize>, Vec<u32>) = decoded
            .iter()
            .flatten()
            .filter(|d| d.block == b)
            .map(|d| (d.position, d.value))
            .unzip();
        let x = g.select_columns(&positions).solve_left(&values).ok_or_else(|| {
            Error::SingularSystem(format!("block {b}: coded symbols inconsistent with the storage code"))
        })?;
        file.extend(x);
    }
    Ok(file)
}

/// Runs the whole protocol for file `i` with a ChaCha8 generator seeded by
/// `seed`, and checks the result against the stored file.
pub fn run_retrieval(system: &StorageSystem, scheme: &RetrievalScheme, i: usize, seed: u64) -> Result<Transcript> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let queries = gen_queries(scheme, system, i, &mut rng)?;
    let f = system.field();
    let mut rounds = Vec::with_capacity(queries.len());
    for (j, round_queries) in queries.into_iter().enumerate() {
        let responses = scheme
            .retained_servers()
            .iter()
            .zip(&round_queries)
            .map(|(&server, q)| server_respond(f, system.column(server), q))
            .collect::<Result<Vec<_>>>()?;
        let decoded = decode_round(scheme, j, &responses)?;
        rounds.push(RoundTranscript {
            queries: round_queries,
            responses,
            decoded,
        });
    }
    let decoded: Vec<Vec<DecodedSymbol>> = rounds.iter().map(|r| r.decoded.clone()).collect();
    let reconstructed = assemble_file(scheme, &decoded)?;
    if reconstructed != system.file(i)? {
        return Err(Error::ReconstructionMismatch { file_index: i });
    }
    Ok(Transcript {
        file_index: i,
        seed,
        retained_servers: scheme.retained_servers().to_vec(),
        downloads: rounds.iter().map(|r| r.responses.len()).sum(),
        rounds,
        reconstructed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{grs_code, GrsSpec};
    use crate::collusion::CollusionPattern;
    use crate::matrix::Matrix;
    use crate::rate::rate;
    use crate::schemes::{
        build_infoset_scheme, build_partition_scheme, build_striped_partition_scheme, build_tpir_scheme,
    };

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    fn example_code() -> LinearCode {
        let g = Matrix::from_rows(f5(), &[[1u64, 0, 4, 3, 2], [0, 1, 2, 3, 4]]).unwrap();
        LinearCode::from_generator(g).unwrap()
    }

    fn grs(p: u64, n: usize, k: usize) -> LinearCode {
        grs_code(&GrsSpec::new(PrimeField::new(p).unwrap(), n, k)).unwrap()
    }

    fn files(p: u32, m: usize, len: usize, salt: u32) -> Vec<Vec<u32>> {
        (0..m)
            .map(|l| (0..len).map(|x| (x as u32 * 3 + l as u32 * 7 + salt) % p).collect())
            .collect()
    }

    #[test]
    fn encode_examples() {
        let c = example_code();
        let sys = encode_storage(&[vec![1, 0]], &c, 1).unwrap();
        let y: Vec<u32> = (0..5).map(|j| sys.column(j)[0]).collect();
        assert_eq!(y, vec![1, 0, 4, 3, 2]);

        let zero = encode_storage(&[vec![0, 0, 0, 0]], &c, 2).unwrap();
        assert!(zero.columns().iter().flatten().all(|&v| v == 0));

        let sys = encode_storage(&[vec![3, 1], vec![2, 4]], &c, 1).unwrap();
        assert_eq!(sys.column(0), &[3, 2]);
        assert_eq!(sys.column(1), &[1, 4]);
    }

    #[test]
    fn encode_rejects_bad_files() {
        let c = example_code();
        assert!(encode_storage(&[vec![1, 0, 0]], &c, 1).is_err());
        assert!(encode_storage(&[vec![1, 5]], &c, 1).is_err());
        assert!(encode_storage(&[vec![1, 0]], &c, 0).is_err());
        assert!(encode_storage(&[], &c, 1).is_err());
    }

    #[test]
    fn random_files_are_reproducible() {
        let a = random_files(f5(), 3, 4, 8);
        assert_eq!(a, random_files(f5(), 3, 4, 8));
        assert_ne!(a, random_files(f5(), 3, 4, 9));
        assert!(a.iter().flatten().all(|&v| v < 5));
    }

    #[test]
    fn respond_examples() {
        assert_eq!(server_respond(f5(), &[1, 2], &[3, 4]).unwrap(), 1);
        assert_eq!(server_respond(f5(), &[1, 2], &[0, 0]).unwrap(), 0);
        assert_eq!(server_respond(f5(), &[1, 2], &[0, 1]).unwrap(), 2);
        assert!(server_respond(f5(), &[1, 2], &[0]).is_err());
    }

    #[test]
    fn example_round_trip_every_index_and_seed() {
        let c = example_code();
        let s = build_tpir_scheme(&c, 2).unwrap();
        let sys = encode_storage(&files(5, 3, 4, 1), &c, 2).unwrap();
        for i in 0..3 {
            for seed in 0..100 {
                let t = run_retrieval(&sys, &s, i, seed).unwrap();
                assert_eq!(t.reconstructed, sys.files()[i]);
                assert_eq!(t.rounds.len(), 2);
                assert!(t.rounds.iter().all(|r| r.decoded.len() == 2));
                assert_eq!(rate(t.decoded_symbols() as u64, t.downloads as u64), s.rate());
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let c = example_code();
        let s = build_tpir_scheme(&c, 2).unwrap();
        let sys = encode_storage(&files(5, 2, 4, 0), &c, 2).unwrap();
        assert_eq!(
            run_retrieval(&sys, &s, 1, 42).unwrap(),
            run_retrieval(&sys, &s, 1, 42).unwrap()
        );
        assert_ne!(
            run_retrieval(&sys, &s, 1, 42).unwrap().rounds[0].queries,
            run_retrieval(&sys, &s, 1, 43).unwrap().rounds[0].queries
        );
    }

    #[test]
    fn responses_are_inner_products_and_syndromes_see_only_leaks() {
        let c = example_code();
        let s = build_tpir_scheme(&c, 2).unwrap();
        let sys = encode_storage(&files(5, 2, 4, 2), &c, 2).unwrap();
        let t = run_retrieval(&sys, &s, 0, 9).unwrap();
        let h = s.parity_check();
        for round in &t.rounds {
            for (pos, &server) in t.retained_servers.iter().enumerate() {
                assert_eq!(round.responses[pos], f5().dot(sys.column(server), &round.queries[pos]));
            }
            let mut leak = vec![0u32; 5];
            for d in &round.decoded {
                leak[d.position] = d.value;
                let expected = sys.column(t.retained_servers[d.position])[d.block];
                assert_eq!(d.value, expected);
            }
            assert_eq!(h.right_mul(&round.responses).unwrap(), h.right_mul(&leak).unwrap());
        }
    }

    #[test]
    fn index_out_of_range() {
        let c = example_code();
        let s = build_tpir_scheme(&c, 2).unwrap();
        let sys = encode_storage(&files(5, 2, 4, 0), &c, 2).unwrap();
        assert!(matches!(
            run_retrieval(&sys, &s, 2, 0),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        let one_stripe = encode_storage(&files(5, 2, 2, 0), &c, 1).unwrap();
        assert!(matches!(
            run_retrieval(&one_stripe, &s, 0, 0),
            Err(Error::SchemeMismatch(_))
        ));
    }

    #[test]
    fn infoset_round_trip() {
        let c = example_code();
        let pattern = CollusionPattern::uniform(5, 2)
            .unwrap()
            .join(&CollusionPattern::from_maximal(5, &[vec![2, 3, 4]]).unwrap())
            .unwrap();
        let s = build_infoset_scheme(&c, &pattern).unwrap();
        let sys = encode_storage(&files(5, 2, 4, 3), &c, s.blocks()).unwrap();
        for i in 0..2 {
            for seed in 0..20 {
                assert_eq!(run_retrieval(&sys, &s, i, seed).unwrap().reconstructed, sys.files()[i]);
            }
        }
    }

    #[test]
    fn partition_queries_constant_on_parts() {
        let c = grs(7, 6, 3);
        let parts = CollusionPattern::from_maximal(6, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let s = build_partition_scheme(&c, &parts).unwrap();
        let sys = encode_storage(&files(7, 3, 3, 5), &c, 1).unwrap();
        let t = run_retrieval(&sys, &s, 2, 11).unwrap();
        assert_eq!(t.rounds.len(), 1);
        assert_eq!(t.rounds[0].decoded.len(), 3);
        let q = &t.rounds[0].queries;
        assert!(q[1] == q[0] && q[2] == q[0] && q[4] == q[3] && q[5] == q[3]);
        assert_ne!(q[0], q[3]);
    }

    #[test]
    fn striped_round_trip_nine_servers() {
        let c = grs(11, 9, 3);
        let parts = CollusionPattern::from_maximal(9, &[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]).unwrap();
        let s = build_striped_partition_scheme(&c, &parts).unwrap();
        let sys = encode_storage(&files(11, 2, 6, 4), &c, 2).unwrap();
        for i in 0..2 {
            let t = run_retrieval(&sys, &s, i, 5).unwrap();
            assert_eq!(t.rounds.len(), 1);
            assert_eq!(t.reconstructed, sys.files()[i]);
            let q = &t.rounds[0].queries;
            let u = &q[0];
            let mut shifted = u.clone();
            shifted[i * 2] = (shifted[i * 2] + 1) % 11;
            assert_eq!(&q[3], &shifted);
            let mut shifted = u.clone();
            shifted[i * 2 + 1] = (shifted[i * 2 + 1] + 1) % 11;
            assert_eq!(&q[6], &shifted);
        }
    }

    #[test]
    fn corrupted_responses_are_detected() {
        let c = grs(7, 6, 3);
        let parts = CollusionPattern::from_maximal(6, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let s = build_partition_scheme(&c, &parts).unwrap();
        let sys = encode_storage(&files(7, 2, 3, 1), &c, 1).unwrap();
        let t = run_retrieval(&sys, &s, 0, 3).unwrap();
        let mut r = t.rounds[0].responses.clone();
        r[0] = (r[0] + 1) % 7;
        let out = reconstruct(&s, &[r]);
        assert!(out.is_err() || out.unwrap() != sys.files()[0]);
        assert!(reconstruct(&s, &[]).is_err());
    }
}
