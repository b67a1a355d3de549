//! Writes a short sequence and a region file to disk and reads both back.

use rppg::frameio::{load_regions, load_sequence, store_regions, store_sequence, Frame, FrameSequence, RegionFile};

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let frames: Vec<Frame> = (0..10)
        .map(|t| {
            let data = (0..64 * 48).map(|i| ((i % 64) * 3 + (i / 64) + t * 5) as u8).collect();
            Frame::new(64, 48, data)
        })
        .collect();
    let seq = FrameSequence::new(30.0, frames)?;
    store_sequence(&seq, dir.path().join("frames"))?;

    let regions = RegionFile::parse(
        "forehead: 10,5 54,5 54,20 10,20\n\
         valid_from_frame=5\n\
         forehead: 11,6 55,6 55,21 11,21\n",
    )?;
    store_regions(&regions, dir.path().join("regions.txt"))?;

    let back = load_sequence(dir.path().join("frames"))?;
    let regions_back = load_regions(dir.path().join("regions.txt"))?;
    assert_eq!(back.frames, seq.frames);
    assert_eq!(regions_back, regions);
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("frames"))?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    names.sort();
    println!("{}", names.join(" "));
    println!("{} frames at {} fps round-tripped", back.len(), back.fps);
    println!("{}", regions_back.to_text());
    Ok(())
}
